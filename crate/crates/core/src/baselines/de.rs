//! DE/rand/1/bin with synchronous greedy replacement on resampled fitness.

use serde::{Deserialize, Serialize};

use crate::benchmark::{Bounds, NoiseModel, Objective};
use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, NOISE_STREAM};
use crate::outcome::RunResult;
use crate::stochastics::RngState;

use super::total_iterations;

/// Config namespace `de`. `rs` and `total_eval` are set per run by the
/// caller and are not read from configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeConfig {
    pub pop_size: usize,
    /// Binomial crossover rate.
    pub cf: f64,
    /// Differential weight.
    pub f_scale: f64,
    #[serde(skip)]
    pub rs: usize,
    #[serde(skip)]
    pub total_eval: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self::new(1, 100_000)
    }
}

impl DeConfig {
    pub fn new(rs: usize, total_eval: u64) -> Self {
        Self { pop_size: 50, cf: 0.8, f_scale: 0.5, rs, total_eval }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 4 {
            return Err(Error::Config(format!("de.pop_size = {} must be at least 4", self.pop_size)));
        }
        if !(0.0..=1.0).contains(&self.cf) {
            return Err(Error::Config(format!("de.cf = {} is not in [0, 1]", self.cf)));
        }
        if !self.f_scale.is_finite() {
            return Err(Error::Config("de.f_scale must be finite".into()));
        }
        Ok(())
    }
}

/// `x_r1 + f * (x_r2 - x_r3)`.
pub fn rand1_mutant(r1: &[f64], r2: &[f64], r3: &[f64], f_scale: f64) -> Vec<f64> {
    r1.iter().zip(r2).zip(r3).map(|((a, b), c)| a + f_scale * (b - c)).collect()
}

/// Binomial crossover: each gene comes from the mutant with probability
/// `cf`, gene `forced` always does. The trial is clamped to `bounds`.
pub fn binomial_crossover(
    target: &[f64],
    mutant: &[f64],
    cf: f64,
    forced: usize,
    bounds: &Bounds,
    rng: &mut RngState,
) -> Vec<f64> {
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&t, &m))| if j == forced || rng.bernoulli(cf) { bounds.clamp(m) } else { t })
        .collect()
}

/// Three distinct indices in `0..n`, all different from `exclude`.
fn distinct_triple(n: usize, exclude: usize, rng: &mut RngState) -> [usize; 3] {
    let mut picked = [usize::MAX; 3];
    let mut k = 0;
    while k < 3 {
        let r = rng.index(n);
        if r != exclude && !picked[..k].contains(&r) {
            picked[k] = r;
            k += 1;
        }
    }
    picked
}

pub fn run_de<O: Objective + ?Sized>(
    objective: &O,
    noise: &NoiseModel,
    cfg: &DeConfig,
    rng: &mut RngState,
) -> Result<RunResult> {
    cfg.validate()?;
    let iterations = total_iterations(cfg.total_eval, cfg.pop_size, cfg.rs)?;
    let bounds = objective.bounds();
    let d = objective.dimension();
    let mut eval = Evaluator::new(objective, *noise, rng.split(NOISE_STREAM), cfg.pop_size, cfg.rs, cfg.total_eval);

    let mut pop: Vec<Vec<f64>> =
        (0..cfg.pop_size).map(|_| (0..d).map(|_| rng.uniform(bounds.lower, bounds.upper)).collect()).collect();
    let mut fit = pop.iter().map(|x| eval.evaluate(x)).collect::<Result<Vec<f64>>>()?;
    eval.budget.total_it = 1;

    for _ in 1..iterations {
        let mut next = pop.clone();
        let mut next_fit = fit.clone();
        for i in 0..cfg.pop_size {
            let [r1, r2, r3] = distinct_triple(cfg.pop_size, i, rng);
            let mutant = rand1_mutant(&pop[r1], &pop[r2], &pop[r3], cfg.f_scale);
            let forced = rng.index(d);
            let trial = binomial_crossover(&pop[i], &mutant, cfg.cf, forced, &bounds, rng);
            let f = eval.evaluate(&trial)?;
            if f <= fit[i] {
                next[i] = trial;
                next_fit[i] = f;
            }
        }
        pop = next;
        fit = next_fit;
        eval.budget.total_it += 1;
    }
    Ok(eval.best.into_result(eval.budget, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scale_mutant_is_base() {
        let m = rand1_mutant(&[1.0, 2.0], &[5.0, -3.0], &[0.5, 9.0], 0.0);
        assert_eq!(m, vec![1.0, 2.0]);
        let m = rand1_mutant(&[1.0, 2.0], &[5.0, -3.0], &[0.5, 9.0], 0.5);
        assert_eq!(m, vec![3.25, -4.0]);
    }

    #[test]
    fn full_crossover_takes_clamped_mutant() {
        let bounds = Bounds::symmetric(1.0);
        let mut rng = RngState::new(1);
        let trial = binomial_crossover(&[0.0, 0.0, 0.0], &[0.5, 3.0, -2.0], 1.0, 0, &bounds, &mut rng);
        assert_eq!(trial, vec![0.5, 1.0, -1.0]);
        let trial = binomial_crossover(&[0.1, 0.2, 0.3], &[0.5, 0.6, 0.7], 0.0, 2, &bounds, &mut rng);
        assert_eq!(trial, vec![0.1, 0.2, 0.7]);
    }

    #[test]
    fn triple_is_distinct() {
        let mut rng = RngState::new(2);
        for _ in 0..1000 {
            let t = distinct_triple(4, 1, &mut rng);
            assert!(!t.contains(&1));
            assert!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
        }
    }

    #[test]
    fn small_population_rejected() {
        let cfg = DeConfig { pop_size: 3, ..DeConfig::new(1, 1000) };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
