//! Aggregation of run records into summary cells and success rates.

use serde::{Deserialize, Serialize};

use super::config::{Algo, Epsilons};
use super::RunRecord;
use crate::benchmark::FunctionId;

/// Mean and sample standard deviation of the best fitness in one
/// `(function, dimension, noisy, sigma, algo, rs)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub function: FunctionId,
    pub dimension: usize,
    pub noisy: bool,
    pub sigma: f64,
    pub algo: Algo,
    pub rs: usize,
    pub runs: usize,
    pub mean_best: f64,
    /// Sample standard deviation (`n - 1` denominator), 0 for one run.
    pub std_best: f64,
    pub mean_total_eval: f64,
    /// Percentage of runs flagged as successful, rounded to an integer.
    pub success_rate: u32,
}

/// Success rate of one `(function, dimension, algo, rs, sigma)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRow {
    pub function: FunctionId,
    pub dimension: usize,
    pub algo: Algo,
    pub rs: usize,
    pub sigma: f64,
    pub runs: usize,
    pub successes: usize,
    pub rate: u32,
}

/// Groups records by key, keeping the order in which keys first appear.
fn group_by<K: PartialEq, T>(items: &[T], key: impl Fn(&T) -> K) -> Vec<(K, Vec<&T>)> {
    let mut groups: Vec<(K, Vec<&T>)> = Vec::new();
    for item in items {
        let k = key(item);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(item),
            None => groups.push((k, vec![item])),
        }
    }
    groups
}

fn percent(successes: usize, runs: usize) -> u32 {
    (100.0 * successes as f64 / runs as f64).round() as u32
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// One summary row per cell, in order of first appearance.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    group_by(records, |r| (r.function, r.dimension, r.noisy, r.sigma.to_bits(), r.algo, r.rs))
        .into_iter()
        .map(|(_, cell)| {
            let first = cell[0];
            let best: Vec<f64> = cell.iter().map(|r| r.best_true_fitness).collect();
            let (mean_best, std_best) = mean_std(&best);
            let evals: Vec<f64> = cell.iter().map(|r| r.total_eval as f64).collect();
            SummaryRow {
                function: first.function,
                dimension: first.dimension,
                noisy: first.noisy,
                sigma: first.sigma,
                algo: first.algo,
                rs: first.rs,
                runs: cell.len(),
                mean_best,
                std_best,
                mean_total_eval: mean_std(&evals).0,
                success_rate: percent(cell.iter().filter(|r| r.success).count(), cell.len()),
            }
        })
        .collect()
}

/// Success rate per noise level: a run succeeds when
/// `best_true_fitness - optimum <= epsilon` for its function.
/// `optimum` maps a record's function and dimension to the optimal value.
pub fn success_rates(
    records: &[RunRecord],
    epsilon: &Epsilons,
    optimum: impl Fn(FunctionId, usize) -> f64,
) -> Vec<SuccessRow> {
    group_by(records, |r| (r.function, r.dimension, r.algo, r.rs, r.sigma.to_bits()))
        .into_iter()
        .map(|(_, cell)| {
            let first = cell[0];
            let threshold = epsilon.threshold(first.function);
            let successes =
                cell.iter().filter(|r| r.best_true_fitness - optimum(r.function, r.dimension) <= threshold).count();
            SuccessRow {
                function: first.function,
                dimension: first.dimension,
                algo: first.algo,
                rs: first.rs,
                sigma: first.sigma,
                runs: cell.len(),
                successes,
                rate: percent(successes, cell.len()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(sigma: f64, rs: usize, repeat: usize, best: f64) -> RunRecord {
        RunRecord {
            function: FunctionId::Sphere,
            dimension: 5,
            noisy: true,
            sigma,
            algo: Algo::Dpsea,
            rs,
            repeat,
            seed: repeat as u64,
            best_true_fitness: best,
            total_eval: 1000,
            success: best <= 1e-3,
            wall_ms: None,
        }
    }

    #[test]
    fn mean_and_sample_std() {
        let rows = summarize(&[record(0.0, 1, 0, 1.0), record(0.0, 1, 1, 2.0), record(0.0, 1, 2, 3.0)]);
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].mean_best, rows[0].std_best, rows[0].runs), (2.0, 1.0, 3));
        let single = summarize(&[record(0.1, 1, 0, 4.5)]);
        assert_eq!((single[0].mean_best, single[0].std_best), (4.5, 0.0));
    }

    #[test]
    fn cells_split_by_sigma_and_rs() {
        let records =
            vec![record(0.0, 1, 0, 1.0), record(0.0, 5, 0, 1.0), record(0.5, 1, 0, 1.0), record(0.0, 1, 1, 3.0)];
        let rows = summarize(&records);
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].sigma, rows[0].rs, rows[0].runs, rows[0].mean_best), (0.0, 1, 2, 2.0));
        assert!(summarize(&[]).is_empty());
    }

    #[test]
    fn success_percentages() {
        let records: Vec<RunRecord> = (0..10).map(|i| record(0.2, 1, i, if i < 7 { 1e-4 } else { 1.0 })).collect();
        let rows = success_rates(&records, &Epsilons::default(), |_, _| 0.0);
        assert_eq!((rows[0].successes, rows[0].rate), (7, 70));
        assert_eq!(summarize(&records)[0].success_rate, 70);
        let all: Vec<RunRecord> = (0..4).map(|i| record(0.0, 1, i, 0.0)).collect();
        assert_eq!(success_rates(&all, &Epsilons::default(), |_, _| 0.0)[0].rate, 100);
        // One in three rounds to 33.
        let third = vec![record(0.0, 1, 0, 0.0), record(0.0, 1, 1, 5.0), record(0.0, 1, 2, 5.0)];
        assert_eq!(success_rates(&third, &Epsilons::default(), |_, _| 0.0)[0].rate, 33);
    }

    #[test]
    fn success_uses_optimum_gap() {
        let r = vec![record(0.0, 1, 0, -299.95)];
        let rows = success_rates(&r, &Epsilons { sphere: 0.1, ..Epsilons::default() }, |_, _| -300.0);
        assert_eq!(rows[0].rate, 100);
    }
}
