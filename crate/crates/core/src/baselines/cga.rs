//! Canonical generational GA with elitism and resampling.

use serde::{Deserialize, Serialize};

use crate::benchmark::{NoiseModel, Objective};
use crate::error::Result;
use crate::evaluator::{Evaluator, NOISE_STREAM};
use crate::ga::{evolve_generation, GaParams, Individual};
use crate::outcome::RunResult;
use crate::stochastics::RngState;

use super::total_iterations;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgaConfig {
    pub ga: GaParams,
    pub rs: usize,
    pub total_eval: u64,
}

impl CgaConfig {
    pub fn new(rs: usize, total_eval: u64) -> Self {
        Self { ga: GaParams::default(), rs, total_eval }
    }

    pub fn total_iterations(&self) -> Result<u64> {
        total_iterations(self.total_eval, self.ga.pop_size, self.rs)
    }
}

pub fn run_cga<O: Objective + ?Sized>(
    objective: &O,
    noise: &NoiseModel,
    cfg: &CgaConfig,
    rng: &mut RngState,
) -> Result<RunResult> {
    cfg.ga.validate()?;
    let iterations = cfg.total_iterations()?;
    let bounds = objective.bounds();
    let mut eval = Evaluator::new(objective, *noise, rng.split(NOISE_STREAM), cfg.ga.pop_size, cfg.rs, cfg.total_eval);

    let mut pop: Vec<Individual> =
        (0..cfg.ga.pop_size).map(|_| Individual::random(objective.dimension(), &bounds, rng)).collect();
    for m in pop.iter_mut() {
        let v = eval.evaluate(&m.genome)?;
        m.set_sampled(v);
    }
    eval.budget.total_it = 1;

    for _ in 1..iterations {
        pop = evolve_generation(&pop, |x| eval.evaluate(x), &cfg.ga, &bounds, rng)?;
        eval.budget.total_it += 1;
        eval.budget.carry_over(cfg.ga.n_elites);
    }
    Ok(eval.best.into_result(eval.budget, Vec::new()))
}
