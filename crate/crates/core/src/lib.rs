//! Noisy black-box optimization with a distributed population switching
//! evolutionary algorithm (DPSEA), three baselines (canonical GA,
//! differential evolution, particle swarm) and an experiment harness.
//!
//! ```
//! use dpsea::benchmark::{BenchmarkFunction, FunctionId, NoiseModel};
//! use dpsea::engine::{run, DpseaParams};
//! use dpsea::stochastics::RngState;
//!
//! let sphere = BenchmarkFunction::new(FunctionId::Sphere);
//! let params = DpseaParams { max_total_eval: 5_000, ..DpseaParams::default() };
//! let result = run(&sphere, &NoiseModel::default(), &params, &mut RngState::new(1)).unwrap();
//! assert!(result.budget.total_eval <= 5_000);
//! ```

// Parameter checks are written as `!(x >= 0.0)` on purpose so that NaN fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod benchmark;
pub mod engine;
pub mod error;
pub mod evaluator;
pub mod ga;
pub mod harness;
pub mod outcome;
pub mod regression;
pub mod stochastics;

pub use error::{Error, Result};
