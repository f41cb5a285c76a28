//! Repeated, seeded experiments over noise levels and resampling counts.
//!
//! An [`ExperimentConfig`] describes one function, one algorithm and the
//! sweep lists. [`run_experiment`] expands it into one run per
//! `(sigma, rs, repeat)` cell, in that nesting order, and returns one
//! [`RunRecord`] per run in the same order regardless of how many worker
//! threads were used.

mod config;
mod output;
mod stats;

pub use config::{Algo, Epsilons, ExperimentConfig, Mode, OutputFormat};
pub use output::{
    read_manifest, read_runs, read_summary, runs_csv_string, write_outputs, write_summary, Manifest, RUNS_HEADER,
};
pub use stats::{success_rates, summarize, SuccessRow, SummaryRow};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_cga, run_de, run_pso, CgaConfig, DeConfig, PsoConfig};
use crate::benchmark::{FunctionId, NoiseModel};
use crate::engine;
use crate::error::{Error, Result};
use crate::outcome::RunResult;
use crate::stochastics::{mix_seed, RngState};

/// Environment variable capping run-level parallelism.
pub const THREADS_ENV: &str = "DPSEA_THREADS";

/// One completed run, as written to `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub function: FunctionId,
    pub dimension: usize,
    pub noisy: bool,
    pub sigma: f64,
    pub algo: Algo,
    pub rs: usize,
    pub repeat: usize,
    pub seed: u64,
    pub best_true_fitness: f64,
    pub total_eval: u64,
    pub success: bool,
    /// Wall time in milliseconds; only recorded when timing is enabled so
    /// that default output is reproducible byte for byte.
    pub wall_ms: Option<u64>,
}

/// Position of one run in the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub sigma_index: usize,
    pub rs_index: usize,
    pub repeat: usize,
}

/// Seed of one run: the base seed mixed with the sweep indices.
pub fn run_seed(base: u64, job: Job) -> u64 {
    mix_seed(base, &[job.sigma_index as u64, job.rs_index as u64, job.repeat as u64])
}

/// All runs of a config, sigma outermost and repeat innermost.
pub fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for sigma_index in 0..cfg.sigmas().len() {
        for rs_index in 0..cfg.rs.len() {
            for repeat in 0..cfg.repeats() {
                out.push(Job { sigma_index, rs_index, repeat });
            }
        }
    }
    out
}

/// Executes one run of the sweep.
pub fn run_job(cfg: &ExperimentConfig, base_seed: u64, job: Job) -> Result<RunRecord> {
    let objective = cfg.objective();
    let sigma = cfg.sigmas()[job.sigma_index];
    let rs = cfg.rs[job.rs_index];
    let noise = NoiseModel::with_sigma(sigma)?;
    let total_eval = cfg.total_eval();
    let seed = run_seed(base_seed, job);
    let mut rng = RngState::new(seed);

    let start = Instant::now();
    let result: RunResult = match cfg.algo {
        Algo::Dpsea => {
            let mut params = cfg.dpsea;
            params.max_total_eval = total_eval;
            params.regression = cfg.regression;
            params.rs_merge = cfg.dpsea_rs_merge.unwrap_or(rs);
            engine::run(&objective, &noise, &params, &mut rng)?
        }
        Algo::Cga => run_cga(&objective, &noise, &CgaConfig { ga: cfg.cga, rs, total_eval }, &mut rng)?,
        Algo::De => run_de(&objective, &noise, &DeConfig { rs, total_eval, ..cfg.de }, &mut rng)?,
        Algo::Pso => run_pso(&objective, &noise, &PsoConfig { rs, total_eval, ..cfg.pso }, &mut rng)?,
    };
    let wall_ms = cfg.timing.then(|| start.elapsed().as_millis() as u64);

    if !result.best_true_fitness.is_finite() {
        return Err(Error::State(format!("run {job:?} ended with a non-finite best fitness")));
    }
    let gap = result.best_true_fitness - objective.optimum_value();
    Ok(RunRecord {
        function: cfg.function,
        dimension: objective.dimension,
        noisy: cfg.noisy,
        sigma,
        algo: cfg.algo,
        rs,
        repeat: job.repeat,
        seed,
        best_true_fitness: result.best_true_fitness,
        total_eval: result.budget.total_eval,
        success: gap <= cfg.success.epsilon.threshold(cfg.function),
        wall_ms,
    })
}

/// Runs the whole sweep with up to `threads` workers (0 or 1 = serial).
///
/// `base_seed` is the resolved base seed; see [`ExperimentConfig::seed`].
pub fn run_experiment(cfg: &ExperimentConfig, base_seed: u64, threads: usize) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let jobs = jobs(cfg);
    log::info!(
        "{} runs of {} on {} (D={}), {} thread(s)",
        jobs.len(),
        cfg.algo,
        cfg.function,
        cfg.objective().dimension,
        threads.max(1)
    );
    if threads <= 1 {
        return jobs.into_iter().map(|job| run_job(cfg, base_seed, job)).collect();
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::State(format!("cannot start worker threads: {e}")))?;
    // `collect` on an indexed parallel iterator keeps the input order.
    pool.install(|| jobs.into_par_iter().map(|job| run_job(cfg, base_seed, job)).collect())
}

/// Worker count from `DPSEA_THREADS`; unset, empty or 0 means serial.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a nonnegative integer, got `{v}`"))),
    }
}
