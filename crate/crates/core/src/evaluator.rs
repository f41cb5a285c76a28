//! True-fitness evaluation with resampling, a budget cap and best-so-far
//! tracking, shared by all optimizers.

use crate::benchmark::{NoiseModel, Objective};
use crate::error::{Error, Result};
use crate::outcome::BestTracker;
use crate::stochastics::{resample, Budget, RngState};

/// Label of the child stream used for noise draws.
pub const NOISE_STREAM: u64 = 0x6e_6f69_7365;

/// Shared state of the true-evaluation steps of a run. Noise draws come
/// from a stream of their own so breeding and sampling never contend for
/// one generator.
pub struct Evaluator<'a, O: Objective + ?Sized> {
    pub objective: &'a O,
    pub noise: NoiseModel,
    pub noise_rng: RngState,
    pub rs: usize,
    /// Evaluations beyond this count are refused.
    pub cap: u64,
    pub budget: Budget,
    pub best: BestTracker,
}

impl<'a, O: Objective + ?Sized> Evaluator<'a, O> {
    pub fn new(objective: &'a O, noise: NoiseModel, noise_rng: RngState, pop_size: usize, rs: usize, cap: u64) -> Self {
        Self { objective, noise, noise_rng, rs, cap, budget: Budget::new(pop_size, rs), best: BestTracker::default() }
    }

    /// Resampled fitness of `x`, or `BudgetExhausted` if `rs` more
    /// evaluations would pass the cap.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if self.budget.total_eval + self.rs as u64 > self.cap {
            return Err(Error::BudgetExhausted { used: self.budget.total_eval, cap: self.cap });
        }
        self.evaluate_uncapped(x)
    }

    /// Resampled fitness of `x` regardless of the cap.
    pub fn evaluate_uncapped(&mut self, x: &[f64]) -> Result<f64> {
        let r = resample(self.objective, x, self.rs, &self.noise, &mut self.noise_rng, &mut self.budget)?;
        self.best.observe(x, r.truth);
        Ok(r.mean)
    }
}
