//! Benchmark problems and the additive Gaussian noise model.
//!
//! All four test functions are minimization problems over a hypercube with
//! the same bounds in every coordinate. The noisy variant of a function adds
//! one Gaussian draw per evaluation, independent of the evaluated point.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastics::{gaussian, RngState};

/// Axis-aligned box with identical bounds per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::Argument(format!("invalid bounds [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn symmetric(half_width: f64) -> Self {
        Self { lower: -half_width, upper: half_width }
    }

    #[inline]
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Length of the main diagonal of the `dimension`-cube.
    pub fn diagonal(&self, dimension: usize) -> f64 {
        self.width() * (dimension as f64).sqrt()
    }
}

/// Anything the optimizers can minimize.
///
/// `evaluate` returns the noiseless objective value. Noise is layered on top
/// by [`noisy_evaluate`], so wrappers (call counters, shifted problems) only
/// have to implement this trait.
pub trait Objective {
    fn dimension(&self) -> usize;
    fn bounds(&self) -> Bounds;
    fn evaluate(&self, x: &[f64]) -> Result<f64>;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn bounds(&self) -> Bounds {
        (**self).bounds()
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        (**self).evaluate(x)
    }
}

/// Identifier of a benchmark function, spelled in lowercase in configs and
/// on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionId {
    Sphere,
    Griewank,
    #[serde(rename = "rastrigin1")]
    RastriginF1,
    Rosenbrock,
}

impl FunctionId {
    pub const ALL: [FunctionId; 4] =
        [FunctionId::Sphere, FunctionId::Griewank, FunctionId::RastriginF1, FunctionId::Rosenbrock];

    pub fn as_str(&self) -> &'static str {
        match self {
            FunctionId::Sphere => "sphere",
            FunctionId::Griewank => "griewank",
            FunctionId::RastriginF1 => "rastrigin1",
            FunctionId::Rosenbrock => "rosenbrock",
        }
    }

    pub fn default_dimension(&self) -> usize {
        match self {
            FunctionId::Sphere => 5,
            _ => 50,
        }
    }

    pub fn default_bounds(&self) -> Bounds {
        match self {
            FunctionId::Sphere => Bounds::symmetric(100.0),
            FunctionId::Griewank => Bounds::symmetric(600.0),
            FunctionId::RastriginF1 => Bounds::symmetric(5.12),
            FunctionId::Rosenbrock => Bounds::symmetric(50.0),
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(FunctionId::Sphere),
            "griewank" => Ok(FunctionId::Griewank),
            "rastrigin1" => Ok(FunctionId::RastriginF1),
            "rosenbrock" => Ok(FunctionId::Rosenbrock),
            other => Err(Error::Argument(format!(
                "unknown function `{other}` (expected sphere, griewank, rastrigin1 or rosenbrock)"
            ))),
        }
    }
}

/// Shift of the Griewank optimum away from the origin.
const GRIEWANK_SHIFT: f64 = 100.0;

/// A configured benchmark problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkFunction {
    pub id: FunctionId,
    pub dimension: usize,
    pub bounds: Bounds,
    /// Additive constant of the Rastrigin variant. Ignored by the other functions.
    pub rastrigin_constant: f64,
}

impl BenchmarkFunction {
    /// The function at its default dimension. Rastrigin uses the constant
    /// `10 * D`, which puts its minimum at zero.
    pub fn new(id: FunctionId) -> Self {
        Self::with_dimension(id, id.default_dimension())
    }

    pub fn with_dimension(id: FunctionId, dimension: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        Self { id, dimension, bounds: id.default_bounds(), rastrigin_constant: 10.0 * dimension as f64 }
    }

    pub fn rastrigin_constant(mut self, constant: f64) -> Self {
        self.rastrigin_constant = constant;
        self
    }

    /// Global minimizer and minimum value.
    pub fn optimum(&self) -> (Vec<f64>, f64) {
        let d = self.dimension;
        match self.id {
            FunctionId::Sphere => (vec![0.0; d], 0.0),
            FunctionId::Griewank => (vec![GRIEWANK_SHIFT; d], 0.0),
            FunctionId::RastriginF1 => (vec![0.0; d], self.rastrigin_constant - 10.0 * d as f64),
            FunctionId::Rosenbrock => (vec![1.0; d], 0.0),
        }
    }

    pub fn optimum_value(&self) -> f64 {
        self.optimum().1
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::Argument(format!(
                "{} expects {} coordinates, got {}",
                self.id,
                self.dimension,
                x.len()
            )));
        }
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !self.bounds.contains(**v)) {
            return Err(Error::Argument(format!(
                "coordinate {i} = {v} outside [{}, {}]",
                self.bounds.lower, self.bounds.upper
            )));
        }
        Ok(())
    }

    fn raw(&self, x: &[f64]) -> f64 {
        match self.id {
            FunctionId::Sphere => x.iter().map(|v| v * v).sum(),
            FunctionId::Griewank => {
                let mut sum = 0.0;
                let mut prod = 1.0;
                for (i, v) in x.iter().enumerate() {
                    let s = v - GRIEWANK_SHIFT;
                    sum += s * s;
                    prod *= (s / ((i + 1) as f64).sqrt()).cos();
                }
                sum / 4000.0 - prod + 1.0
            }
            FunctionId::RastriginF1 => {
                self.rastrigin_constant + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
            }
            FunctionId::Rosenbrock => x
                .windows(2)
                .map(|w| {
                    let a = w[1] - w[0] * w[0];
                    let b = w[0] - 1.0;
                    100.0 * a * a + b * b
                })
                .sum(),
        }
    }
}

impl Objective for BenchmarkFunction {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Noiseless value. Rejects wrong lengths and out-of-bounds coordinates;
    /// callers clamp before evaluating.
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.raw(x))
    }
}

/// Additive Gaussian disturbance `N(mu, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub mu: f64,
    pub sigma: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { mu: 0.0, sigma: 1.0 }
    }
}

impl NoiseModel {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::Argument(format!("invalid noise N({mu}, {sigma}^2)")));
        }
        Ok(Self { mu, sigma })
    }

    pub fn noiseless() -> Self {
        Self { mu: 0.0, sigma: 0.0 }
    }

    pub fn with_sigma(sigma: f64) -> Result<Self> {
        Self::new(0.0, sigma)
    }

    /// Density of the noise distribution at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * PI).sqrt())
    }
}

/// True fitness plus one noise draw taken from `rng`.
///
/// With `sigma == 0` no randomness is consumed and the true fitness is
/// returned unchanged.
pub fn noisy_evaluate<O: Objective + ?Sized>(
    objective: &O,
    x: &[f64],
    noise: &NoiseModel,
    rng: &mut RngState,
) -> Result<f64> {
    let f = objective.evaluate(x)?;
    if noise.sigma == 0.0 {
        return Ok(f);
    }
    Ok(f + gaussian(rng, noise.mu, noise.sigma)?)
}
