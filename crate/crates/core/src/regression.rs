//! Local polynomial regression used to estimate fitness inside a
//! pseudo-population.
//!
//! Three nested bases are supported: a constant, a linear model and a
//! diagonal quadratic `b0 + sum_i (b_i z_i + g_i z_i^2)`. Inputs are
//! standardized per coordinate before fitting and the fit is a ridge least
//! squares problem with an unpenalized intercept. Well conditioned systems
//! go through a Cholesky solve of the normal equations; the rest fall back
//! to Householder QR on the augmented system and SVD when rank deficient.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ridge strength.
pub const DEFAULT_LAMBDA: f64 = 1e-6;

/// Default ratio between the sample count needed for a diagonal quadratic
/// fit and `D + 1`.
pub const DEFAULT_QUADRATIC_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Constant,
    Linear,
    DiagQuadratic,
}

impl ModelKind {
    /// Number of coefficients for a `dimension`-dimensional input.
    pub fn terms(&self, dimension: usize) -> usize {
        match self {
            ModelKind::Constant => 1,
            ModelKind::Linear => dimension + 1,
            ModelKind::DiagQuadratic => 2 * dimension + 1,
        }
    }
}

/// Richest basis the sample count supports with the default thresholds:
/// diagonal quadratic from `2D + 2` samples, linear from `D + 2`.
pub fn select_kind(sample_count: usize, dimension: usize) -> ModelKind {
    select_kind_with(sample_count, dimension, DEFAULT_QUADRATIC_FACTOR)
}

/// As [`select_kind`], with the quadratic threshold at
/// `quadratic_factor * (D + 1)` samples.
pub fn select_kind_with(sample_count: usize, dimension: usize, quadratic_factor: f64) -> ModelKind {
    let n = sample_count as f64;
    if n >= quadratic_factor * (dimension + 1) as f64 && sample_count > 2 * dimension {
        ModelKind::DiagQuadratic
    } else if sample_count >= dimension + 2 {
        ModelKind::Linear
    } else {
        ModelKind::Constant
    }
}

/// A fitted model. Coefficients live in standardized coordinates
/// `z = (x - center) / scale` and are laid out as
/// `[intercept, linear_1..D, quadratic_1..D]`, truncated to the kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub kind: ModelKind,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

/// Model coefficients expressed in the original coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPolynomial {
    pub intercept: f64,
    pub linear: Vec<f64>,
    pub quadratic: Vec<f64>,
}

/// Per-coordinate mean and population standard deviation. Zero or
/// non-finite spread maps to a scale of 1.
pub fn standardization<X: AsRef<[f64]>>(xs: &[X]) -> (Vec<f64>, Vec<f64>) {
    let d = xs[0].as_ref().len();
    let n = xs.len() as f64;
    let mut center = vec![0.0; d];
    for x in xs {
        for (c, v) in center.iter_mut().zip(x.as_ref()) {
            *c += v;
        }
    }
    center.iter_mut().for_each(|c| *c /= n);
    let mut scale = vec![0.0; d];
    for x in xs {
        for ((s, v), c) in scale.iter_mut().zip(x.as_ref()).zip(&center) {
            *s += (v - c) * (v - c);
        }
    }
    for s in scale.iter_mut() {
        let sd = (*s / n).sqrt();
        *s = if sd > 0.0 && sd.is_finite() { sd } else { 1.0 };
    }
    (center, scale)
}

/// Fits `kind` to the samples `(xs[j], ys[j])` by ridge least squares.
///
/// The penalty `lambda * |beta|^2` skips the intercept, so a constant model
/// is the sample mean for every `lambda`.
pub fn fit<X: AsRef<[f64]>>(xs: &[X], ys: &[f64], kind: ModelKind, lambda: f64) -> Result<RegressionModel> {
    if xs.is_empty() {
        return Err(Error::Argument("regression needs at least one sample".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::Argument(format!("{} inputs but {} targets", xs.len(), ys.len())));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(format!("ridge strength must be finite and nonnegative, got {lambda}")));
    }
    let d = xs[0].as_ref().len();
    if xs.iter().any(|x| x.as_ref().len() != d) {
        return Err(Error::Argument("regression inputs differ in length".into()));
    }
    if ys.iter().any(|y| !y.is_finite()) || xs.iter().any(|x| x.as_ref().iter().any(|v| !v.is_finite())) {
        return Err(Error::Argument("regression samples must be finite".into()));
    }

    let (center, scale) = standardization(xs);
    let coefficients = if kind == ModelKind::Constant {
        vec![ys.iter().sum::<f64>() / ys.len() as f64]
    } else {
        solve_ridge(xs, ys, kind, lambda, &center, &scale)?
    };
    Ok(RegressionModel { kind, coefficients, lambda, center, scale })
}

fn features(z: &[f64], kind: ModelKind, out: &mut [f64]) {
    out[0] = 1.0;
    let d = z.len();
    out[1..=d].copy_from_slice(z);
    if kind == ModelKind::DiagQuadratic {
        for (o, v) in out[d + 1..].iter_mut().zip(z) {
            *o = v * v;
        }
    }
}

fn solve_ridge<X: AsRef<[f64]>>(
    xs: &[X],
    ys: &[f64],
    kind: ModelKind,
    lambda: f64,
    center: &[f64],
    scale: &[f64],
) -> Result<Vec<f64>> {
    let d = center.len();
    let p = kind.terms(d);
    let n = xs.len();
    let penalty_rows = if lambda > 0.0 { p - 1 } else { 0 };
    let m = n + penalty_rows;

    // Column-major design matrix, augmented with the penalty rows.
    let mut a = vec![0.0; m * p];
    let mut b = vec![0.0; m];
    let mut z = vec![0.0; d];
    let mut row = vec![0.0; p];
    for (j, (x, &y)) in xs.iter().zip(ys).enumerate() {
        for ((zi, xi), (c, s)) in z.iter_mut().zip(x.as_ref()).zip(center.iter().zip(scale)) {
            *zi = (xi - c) / s;
        }
        features(&z, kind, &mut row);
        for (k, v) in row.iter().enumerate() {
            a[k * m + j] = *v;
        }
        b[j] = y;
    }
    let root = lambda.sqrt();
    for k in 0..penalty_rows {
        a[(k + 1) * m + n + k] = root;
    }

    let beta = normal_equations(&a, &b, n, m, p, lambda).or_else(|| {
        if m >= p {
            householder_solve(a.clone(), b.clone(), m, p)
        } else {
            None
        }
    });
    let beta: Vec<f64> = match beta {
        Some(beta) => beta,
        None => DMatrix::from_column_slice(m, p, &a)
            .svd(true, true)
            .solve(&DVector::from_vec(b), 1e-14)
            .map_err(|e| Error::State(format!("least squares solve failed: {e}")))?
            .iter()
            .copied()
            .collect(),
    };
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::State("least squares produced non-finite coefficients".into()));
    }
    Ok(beta)
}

/// Smallest squared ratio of Cholesky pivots accepted before falling back
/// to QR. The ratio bounds the Gram matrix condition number from below.
const CHOLESKY_PIVOT_RATIO: f64 = 1e-8;

/// Cholesky solve of `(A^T A + lambda P) beta = A^T b` on the first `n`
/// (data) rows. `None` when the Gram matrix is not comfortably positive
/// definite, in which case the caller falls back to QR.
fn normal_equations(a: &[f64], b: &[f64], n: usize, m: usize, p: usize, lambda: f64) -> Option<Vec<f64>> {
    let col = |j: usize| &a[j * m..j * m + n];
    let mut gram = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let g = dot(col(i), col(j));
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
        if i > 0 {
            gram[(i, i)] += lambda;
        }
    }
    let rhs = DVector::from_fn(p, |i, _| dot(col(i), &b[..n]));
    let chol = gram.cholesky()?;
    let l = chol.l_dirty();
    let (lo, hi) = (0..p).fold((f64::INFINITY, 0.0f64), |(lo, hi), k| (lo.min(l[(k, k)]), hi.max(l[(k, k)])));
    if !(hi > 0.0) || (lo / hi).powi(2) < CHOLESKY_PIVOT_RATIO {
        return None;
    }
    Some(chol.solve(&rhs).iter().copied().collect())
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(u: &[f64], v: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (uc, vc) = (u.chunks_exact(4), v.chunks_exact(4));
    let tail: f64 = uc.remainder().iter().zip(vc.remainder()).map(|(x, y)| x * y).sum();
    for (a, b) in uc.zip(vc) {
        for k in 0..4 {
            acc[k] += a[k] * b[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Householder QR least squares on a column-major `m x p` matrix, `m >= p`.
/// `None` when `R` is numerically singular.
fn householder_solve(mut a: Vec<f64>, mut b: Vec<f64>, m: usize, p: usize) -> Option<Vec<f64>> {
    let mut diag = vec![0.0; p];
    for k in 0..p {
        let (head, tail) = a.split_at_mut((k + 1) * m);
        let col = &mut head[k * m + k..];
        let norm = dot(col, col).sqrt();
        if norm == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if col[0] > 0.0 { -norm } else { norm };
        col[0] -= alpha;
        // v = col, H = I - 2 v v^T / (v^T v); v^T v = -2 alpha v0.
        let vtv = -alpha * col[0];
        diag[k] = alpha;
        let v: &[f64] = col;
        for j in 0..p - k - 1 {
            let target = &mut tail[j * m + k..(j + 1) * m];
            let f = dot(v, target) / vtv;
            target.iter_mut().zip(v).for_each(|(t, x)| *t -= f * x);
        }
        let target = &mut b[k..];
        let f = dot(v, target) / vtv;
        target.iter_mut().zip(v).for_each(|(t, x)| *t -= f * x);
    }
    let diag_max = diag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if diag_max == 0.0 || diag.iter().any(|v| v.abs() <= diag_max * 1e-12) {
        return None;
    }
    let mut x = vec![0.0; p];
    for k in (0..p).rev() {
        let mut acc = b[k];
        for j in k + 1..p {
            acc -= a[j * m + k] * x[j];
        }
        x[k] = acc / diag[k];
    }
    Some(x)
}

impl RegressionModel {
    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    /// Model value at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::Argument(format!("model expects {} coordinates, got {}", self.dimension(), x.len())));
        }
        Ok(self.value(x))
    }

    fn value(&self, x: &[f64]) -> f64 {
        let c = &self.coefficients;
        let mut acc = c[0];
        if self.kind == ModelKind::Constant {
            return acc;
        }
        let d = self.dimension();
        for i in 0..d {
            let z = (x[i] - self.center[i]) / self.scale[i];
            acc += c[1 + i] * z;
            if self.kind == ModelKind::DiagQuadratic {
                acc += c[1 + d + i] * z * z;
            }
        }
        acc
    }

    /// Expands the standardized coefficients back to raw coordinates.
    pub fn raw_coefficients(&self) -> RawPolynomial {
        let d = self.dimension();
        let c = &self.coefficients;
        let mut raw = RawPolynomial { intercept: c[0], linear: vec![0.0; d], quadratic: vec![0.0; d] };
        if self.kind == ModelKind::Constant {
            return raw;
        }
        for i in 0..d {
            let (m, s) = (self.center[i], self.scale[i]);
            let beta = c[1 + i];
            raw.linear[i] += beta / s;
            raw.intercept -= beta * m / s;
            if self.kind == ModelKind::DiagQuadratic {
                let gamma = c[1 + d + i];
                let s2 = s * s;
                raw.quadratic[i] = gamma / s2;
                raw.linear[i] -= 2.0 * gamma * m / s2;
                raw.intercept += gamma * m * m / s2;
            }
        }
        raw
    }
}
