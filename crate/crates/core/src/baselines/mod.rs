//! Fixed-budget baselines: canonical GA, differential evolution and particle
//! swarm optimization.
//!
//! Each baseline spends `total_eval` evaluations as `total_it` population
//! passes of `pop_size * rs` evaluations, with
//! `total_it = floor(total_eval / (pop_size * rs))`; the first pass scores
//! the initial population.

pub mod cga;
pub mod de;
pub mod pso;

pub use cga::{run_cga, CgaConfig};
pub use de::{run_de, DeConfig};
pub use pso::{run_pso, PsoConfig};

use crate::error::{Error, Result};

/// Number of population passes that fit in the budget. Errors when not even
/// one fits.
pub fn total_iterations(total_eval: u64, pop_size: usize, rs: usize) -> Result<u64> {
    if pop_size == 0 || rs == 0 {
        return Err(Error::Config("population size and resampling count must be positive".into()));
    }
    let per_pass = pop_size as u64 * rs as u64;
    let it = total_eval / per_pass;
    if it == 0 {
        return Err(Error::Config(format!(
            "budget of {total_eval} evaluations cannot cover one pass of {pop_size} x {rs}"
        )));
    }
    Ok(it)
}
