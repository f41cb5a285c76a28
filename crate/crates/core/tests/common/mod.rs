//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::cell::Cell;

use dpsea::benchmark::{Bounds, Objective};
use dpsea::ga::Individual;
use dpsea::regression::ModelKind;

/// Counts every call to the wrapped objective.
pub struct Counting<O> {
    pub inner: O,
    pub calls: Cell<u64>,
}

impl<O> Counting<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, calls: Cell::new(0) }
    }
}

impl<O: Objective> Objective for Counting<O> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn bounds(&self) -> Bounds {
        self.inner.bounds()
    }
    fn evaluate(&self, x: &[f64]) -> dpsea::Result<f64> {
        self.calls.set(self.calls.get() + 1);
        self.inner.evaluate(x)
    }
}

/// Solves `(F^T F + lambda * P) b = F^T y` by Gaussian elimination with
/// partial pivoting, where `F` holds standardized features and `P` is the
/// identity without its intercept entry.
#[allow(clippy::needless_range_loop)]
pub fn regression_oracle(xs: &[Vec<f64>], ys: &[f64], kind: ModelKind, lambda: f64) -> Vec<f64> {
    let n = xs.len();
    let d = xs[0].len();
    let mut center = vec![0.0; d];
    let mut scale = vec![0.0; d];
    for i in 0..d {
        center[i] = xs.iter().map(|x| x[i]).sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x[i] - center[i]).powi(2)).sum::<f64>() / n as f64;
        scale[i] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let features = |x: &Vec<f64>| -> Vec<f64> {
        let z: Vec<f64> = (0..d).map(|i| (x[i] - center[i]) / scale[i]).collect();
        let mut f = vec![1.0];
        if kind != ModelKind::Constant {
            f.extend(&z);
        }
        if kind == ModelKind::DiagQuadratic {
            f.extend(z.iter().map(|v| v * v));
        }
        f
    };
    let rows: Vec<Vec<f64>> = xs.iter().map(features).collect();
    let p = rows[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (r, y) in rows.iter().zip(ys) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += r[i] * r[j];
            }
            a[i][p] += r[i] * y;
        }
    }
    for (i, row) in a.iter_mut().enumerate().skip(1) {
        row[i] += lambda;
    }
    for col in 0..p {
        let pivot = (col..p).max_by(|&u, &v| a[u][col].abs().total_cmp(&a[v][col].abs())).unwrap();
        a.swap(col, pivot);
        for r in 0..p {
            if r != col {
                let factor = a[r][col] / a[col][col];
                for c in col..=p {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Brute-force reference: best-first seeds claim everything within the
/// radius; leftovers go to the nearest seed.
pub fn oracle_labels(pop: &[Individual], radius: f64, max_clusters: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| pop[a].fitness.total_cmp(&pop[b].fitness).then(a.cmp(&b)));
    let mut label = vec![usize::MAX; pop.len()];
    let mut seeds = Vec::new();
    for &i in &order {
        if label[i] != usize::MAX || seeds.len() == max_clusters {
            continue;
        }
        label[i] = seeds.len();
        for j in 0..pop.len() {
            if label[j] == usize::MAX && dist(&pop[i].genome, &pop[j].genome) <= radius {
                label[j] = seeds.len();
            }
        }
        seeds.push(i);
    }
    for j in 0..pop.len() {
        if label[j] == usize::MAX {
            let mut best = 0;
            for (c, &s) in seeds.iter().enumerate() {
                if dist(&pop[j].genome, &pop[s].genome) < dist(&pop[j].genome, &pop[seeds[best]].genome) {
                    best = c;
                }
            }
            label[j] = best;
        }
    }
    label
}
