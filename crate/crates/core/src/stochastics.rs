//! Seeded randomness, Gaussian draws and resampled fitness with evaluation
//! accounting.
//!
//! [`RngState`] wraps a ChaCha8 stream cipher generator. It is portable and
//! stable across platforms for a given `rand_chacha` release. Child streams
//! come from [`RngState::split`], which hashes `(seed, label)` with
//! SplitMix64 into a fresh seed.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::benchmark::{NoiseModel, Objective};
use crate::error::{Error, Result};

/// SplitMix64 finalizer. Used for seed derivation only.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of indices into a base seed.
///
/// `mix_seed(s, &[a, b])` equals `mix_seed(mix_seed(s, &[a]), &[b])`.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(base, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Seeded, splittable generator owned by a single run.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Seed drawn from the operating system.
    pub fn entropy_seed() -> u64 {
        rand::rng().next_u64()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream, a pure function of `(seed, label)`.
    /// Does not advance `self`.
    pub fn split(&self, label: u64) -> RngState {
        RngState::new(mix_seed(self.seed, &[label]))
    }

    /// Uniform draw in `[lo, hi)`; returns `lo` when the interval is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.inner.random::<f64>() < p
        }
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// One draw from `N(mu, sigma^2)`. `sigma == 0` returns `mu` without
/// touching the generator.
pub fn gaussian(rng: &mut RngState, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::Argument(format!("standard deviation must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(mu);
    }
    let z: f64 = rng.inner.sample(StandardNormal);
    Ok(mu + sigma * z)
}

/// Evaluation accounting for one run.
///
/// For fixed-schedule optimizers the counters satisfy
/// `total_eval == pop_size * total_it * rs - total_unchanged`, where
/// `total_it` counts population passes (the initial evaluation included)
/// and `total_unchanged` counts the evaluations skipped for individuals
/// carried over without re-evaluation (`rs` per skipped individual).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub pop_size: u64,
    pub total_it: u64,
    pub rs: u64,
    pub total_unchanged: u64,
    pub total_eval: u64,
}

impl Budget {
    pub fn new(pop_size: usize, rs: usize) -> Self {
        Self { pop_size: pop_size as u64, rs: rs as u64, ..Self::default() }
    }

    /// Records `count` individuals that kept their fitness without being
    /// re-evaluated.
    pub fn carry_over(&mut self, count: usize) {
        self.total_unchanged += count as u64 * self.rs;
    }

    /// `pop_size * total_it * rs - total_unchanged`.
    pub fn scheduled_evals(&self) -> i128 {
        self.pop_size as i128 * self.total_it as i128 * self.rs as i128 - self.total_unchanged as i128
    }

    pub fn identity_holds(&self) -> bool {
        self.scheduled_evals() == self.total_eval as i128
    }
}

/// Outcome of resampling one genome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resampled {
    /// Mean of the noisy observations.
    pub mean: f64,
    /// Noiseless value of the genome, for scoring only.
    pub truth: f64,
}

/// Mean of `rs` independent noisy evaluations of `x`. Each sample is one
/// call to the objective and one unit of `budget.total_eval`.
pub fn resampled_fitness<O: Objective + ?Sized>(
    objective: &O,
    x: &[f64],
    rs: usize,
    noise: &NoiseModel,
    rng: &mut RngState,
    budget: &mut Budget,
) -> Result<f64> {
    resample(objective, x, rs, noise, rng, budget).map(|r| r.mean)
}

/// [`resampled_fitness`] that also reports the noiseless value observed
/// along the way.
pub fn resample<O: Objective + ?Sized>(
    objective: &O,
    x: &[f64],
    rs: usize,
    noise: &NoiseModel,
    rng: &mut RngState,
    budget: &mut Budget,
) -> Result<Resampled> {
    if rs == 0 {
        return Err(Error::Argument("resampling count must be at least 1".into()));
    }
    let mut sum = 0.0;
    let mut truth = f64::NAN;
    for _ in 0..rs {
        let f = objective.evaluate(x)?;
        budget.total_eval += 1;
        truth = f;
        sum += if noise.sigma == 0.0 { f } else { f + gaussian(rng, noise.mu, noise.sigma)? };
    }
    Ok(Resampled { mean: sum / rs as f64, truth })
}
