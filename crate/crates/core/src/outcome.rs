//! What an optimizer run reports back.

use serde::{Deserialize, Serialize};

use crate::stochastics::Budget;

/// One record per completed switching cycle of DPSEA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleTrace {
    pub cycle: usize,
    pub total_eval: u64,
    pub best_true_fitness: f64,
    pub clusters: usize,
    pub eligible: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Best genome among all truly evaluated candidates, judged by the
    /// noiseless objective.
    pub best_genome: Vec<f64>,
    pub best_true_fitness: f64,
    pub budget: Budget,
    /// Per-cycle trace. Empty for the baselines.
    pub trace: Vec<CycleTrace>,
}

/// Keeps the best noiseless value seen so far. Ties keep the earlier genome.
#[derive(Debug, Clone)]
pub struct BestTracker {
    genome: Vec<f64>,
    value: f64,
}

impl Default for BestTracker {
    fn default() -> Self {
        Self { genome: Vec::new(), value: f64::INFINITY }
    }
}

impl BestTracker {
    pub fn observe(&mut self, genome: &[f64], truth: f64) {
        if truth < self.value {
            self.value = truth;
            self.genome.clear();
            self.genome.extend_from_slice(genome);
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn into_result(self, budget: Budget, trace: Vec<CycleTrace>) -> RunResult {
        RunResult { best_genome: self.genome, best_true_fitness: self.value, budget, trace }
    }
}
