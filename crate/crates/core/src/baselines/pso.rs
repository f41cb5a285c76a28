//! Synchronous global-best PSO with a linearly decreasing inertia weight.

use serde::{Deserialize, Serialize};

use crate::benchmark::{Bounds, NoiseModel, Objective};
use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, NOISE_STREAM};
use crate::outcome::RunResult;
use crate::stochastics::RngState;

use super::total_iterations;

/// Config namespace `pso`. `rs` and `total_eval` are set per run by the
/// caller and are not read from configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    pub pop_size: usize,
    pub w_start: f64,
    pub w_end: f64,
    /// Bounds of the per-dimension random attraction weights.
    pub phi_min: f64,
    pub phi_max: f64,
    #[serde(skip)]
    pub rs: usize,
    #[serde(skip)]
    pub total_eval: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self::new(1, 100_000)
    }
}

impl PsoConfig {
    pub fn new(rs: usize, total_eval: u64) -> Self {
        Self { pop_size: 20, w_start: 1.0, w_end: 0.7, phi_min: 0.0, phi_max: 2.0, rs, total_eval }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop_size == 0 {
            return Err(Error::Config("pso.pop_size must be positive".into()));
        }
        if !(self.w_end <= self.w_start) {
            return Err(Error::Config(format!("pso.w_end = {} exceeds pso.w_start = {}", self.w_end, self.w_start)));
        }
        if !(self.phi_min <= self.phi_max) {
            return Err(Error::Config(format!(
                "pso.phi_min = {} exceeds pso.phi_max = {}",
                self.phi_min, self.phi_max
            )));
        }
        Ok(())
    }
}

/// Inertia weight for move `t` of `moves`, linear from `start` at the first
/// move to `end` at the last.
pub fn inertia_weight(t: u64, moves: u64, start: f64, end: f64) -> f64 {
    if moves <= 1 {
        return start;
    }
    start + (end - start) * t as f64 / (moves - 1) as f64
}

/// Velocity update followed by a clamped position update.
#[allow(clippy::too_many_arguments)]
pub fn move_particle(
    x: &mut [f64],
    v: &mut [f64],
    pbest: &[f64],
    gbest: &[f64],
    w: f64,
    phi: (f64, f64),
    bounds: &Bounds,
    rng: &mut RngState,
) {
    for j in 0..x.len() {
        let phi1 = rng.uniform(phi.0, phi.1);
        let phi2 = rng.uniform(phi.0, phi.1);
        v[j] = w * v[j] + phi1 * (pbest[j] - x[j]) + phi2 * (gbest[j] - x[j]);
        x[j] = bounds.clamp(x[j] + v[j]);
    }
}

pub fn run_pso<O: Objective + ?Sized>(
    objective: &O,
    noise: &NoiseModel,
    cfg: &PsoConfig,
    rng: &mut RngState,
) -> Result<RunResult> {
    cfg.validate()?;
    let iterations = total_iterations(cfg.total_eval, cfg.pop_size, cfg.rs)?;
    let bounds = objective.bounds();
    let d = objective.dimension();
    let mut eval = Evaluator::new(objective, *noise, rng.split(NOISE_STREAM), cfg.pop_size, cfg.rs, cfg.total_eval);

    let mut xs: Vec<Vec<f64>> =
        (0..cfg.pop_size).map(|_| (0..d).map(|_| rng.uniform(bounds.lower, bounds.upper)).collect()).collect();
    let mut vs = vec![vec![0.0; d]; cfg.pop_size];
    let mut pbest = xs.clone();
    let mut pbest_fit = xs.iter().map(|x| eval.evaluate(x)).collect::<Result<Vec<f64>>>()?;
    eval.budget.total_it = 1;
    let mut g = argmin(&pbest_fit);

    let moves = iterations - 1;
    for t in 0..moves {
        let w = inertia_weight(t, moves, cfg.w_start, cfg.w_end);
        let gbest = pbest[g].clone();
        for i in 0..cfg.pop_size {
            move_particle(&mut xs[i], &mut vs[i], &pbest[i], &gbest, w, (cfg.phi_min, cfg.phi_max), &bounds, rng);
        }
        for i in 0..cfg.pop_size {
            let f = eval.evaluate(&xs[i])?;
            if f < pbest_fit[i] {
                pbest_fit[i] = f;
                pbest[i].clone_from(&xs[i]);
            }
        }
        g = argmin(&pbest_fit);
        eval.budget.total_it += 1;
    }
    Ok(eval.best.into_result(eval.budget, Vec::new()))
}

fn argmin(values: &[f64]) -> usize {
    (0..values.len()).reduce(|b, i| if values[i] < values[b] { i } else { b }).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inertia_schedule_endpoints() {
        assert_eq!(inertia_weight(0, 100, 1.0, 0.7), 1.0);
        assert!((inertia_weight(99, 100, 1.0, 0.7) - 0.7).abs() < 1e-15);
        assert!((inertia_weight(33, 67, 1.0, 0.7) - 0.85).abs() < 1e-15);
        assert_eq!(inertia_weight(0, 1, 1.0, 0.7), 1.0);
    }

    #[test]
    fn particle_at_rest_on_best_stays() {
        let bounds = Bounds::symmetric(10.0);
        let mut rng = RngState::new(3);
        let mut x = vec![1.0, -2.0, 3.0];
        let mut v = vec![0.0; 3];
        let best = x.clone();
        move_particle(&mut x, &mut v, &best, &best, 0.9, (0.0, 2.0), &bounds, &mut rng);
        assert_eq!(x, best);
        assert_eq!(v, vec![0.0; 3]);
    }

    #[test]
    fn positions_are_clamped() {
        let bounds = Bounds::symmetric(1.0);
        let mut rng = RngState::new(4);
        let mut x = vec![0.9, -0.9];
        let mut v = vec![5.0, -5.0];
        move_particle(&mut x, &mut v, &[0.9, -0.9], &[0.9, -0.9], 1.0, (0.0, 0.0), &bounds, &mut rng);
        assert_eq!(x, vec![1.0, -1.0]);
    }

    #[test]
    fn config_checks() {
        assert!(PsoConfig { w_end: 1.2, ..PsoConfig::new(1, 100) }.validate().is_err());
        assert!(PsoConfig { phi_min: 3.0, ..PsoConfig::new(1, 100) }.validate().is_err());
        assert!(PsoConfig::new(1, 100).validate().is_ok());
    }
}
