//! Experiment configuration: a JSON tree with one namespace per module.
//!
//! ```json
//! {
//!   "function": "griewank",
//!   "algo": "dpsea",
//!   "mode": "success",
//!   "sigma": [0.0, 0.1, 0.2],
//!   "rs": [1],
//!   "seed": 42,
//!   "dpsea": { "t_switch": 10, "ga": { "pop_size": 100 } },
//!   "regression": { "lambda": 1e-6 },
//!   "success": { "epsilon": { "griewank": 0.01 } }
//! }
//! ```
//!
//! Unknown keys are rejected so that typos fail loudly.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{total_iterations, DeConfig, PsoConfig};
use crate::benchmark::{BenchmarkFunction, FunctionId};
use crate::engine::{DpseaParams, RegressionParams};
use crate::error::{Error, Result};
use crate::ga::GaParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    #[default]
    Dpsea,
    Cga,
    De,
    Pso,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::Dpsea, Algo::Cga, Algo::De, Algo::Pso];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::Dpsea => "dpsea",
            Algo::Cga => "cga",
            Algo::De => "de",
            Algo::Pso => "pso",
        }
    }

    /// Evaluation budget of the published comparison: DPSEA used 90,000,
    /// 430,000 and 450,000 evaluations, the baselines 100,000 and 500,000.
    pub fn default_total_eval(&self, function: FunctionId) -> u64 {
        match (self, function) {
            (Algo::Dpsea, FunctionId::Sphere) => 90_000,
            (Algo::Dpsea, FunctionId::Griewank) => 430_000,
            (Algo::Dpsea, _) => 450_000,
            (_, FunctionId::Sphere) => 100_000,
            _ => 500_000,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown algorithm `{s}` (expected dpsea, cga, de or pso)")))
    }
}

/// What the sweep is for. Only changes the default repeat count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Mean and standard deviation of the best fitness, 30 repeats.
    #[default]
    Stats,
    /// Success rates per noise level, 100 repeats.
    Success,
}

impl Mode {
    pub fn default_repeats(&self) -> usize {
        match self {
            Mode::Stats => 30,
            Mode::Success => 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Argument(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

/// Success thresholds on `best_true_fitness - optimum`, per function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Epsilons {
    pub sphere: f64,
    pub griewank: f64,
    pub rastrigin1: f64,
    pub rosenbrock: f64,
}

impl Default for Epsilons {
    fn default() -> Self {
        Self { sphere: 1e-3, griewank: 1e-2, rastrigin1: 1e-1, rosenbrock: 50.0 }
    }
}

impl Epsilons {
    pub fn threshold(&self, function: FunctionId) -> f64 {
        match function {
            FunctionId::Sphere => self.sphere,
            FunctionId::Griewank => self.griewank,
            FunctionId::RastriginF1 => self.rastrigin1,
            FunctionId::Rosenbrock => self.rosenbrock,
        }
    }

    pub fn set(&mut self, function: FunctionId, value: f64) {
        match function {
            FunctionId::Sphere => self.sphere = value,
            FunctionId::Griewank => self.griewank = value,
            FunctionId::RastriginF1 => self.rastrigin1 = value,
            FunctionId::Rosenbrock => self.rosenbrock = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuccessSection {
    pub epsilon: Epsilons,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: FunctionId,
    /// Defaults to 5 for the sphere and 50 otherwise.
    #[serde(default)]
    pub dimension: Option<usize>,
    /// Rastrigin constant; defaults to `10 * D`.
    #[serde(default)]
    pub rastrigin_constant: Option<f64>,
    #[serde(default)]
    pub algo: Algo,
    /// With `noisy = false` every sigma must be zero.
    #[serde(default = "default_noisy")]
    pub noisy: bool,
    /// Noise standard deviations; defaults to `[1.0]` when noisy and
    /// `[0.0]` otherwise.
    #[serde(default)]
    pub sigma: Option<Vec<f64>>,
    #[serde(default = "default_rs")]
    pub rs: Vec<usize>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub repeats: Option<usize>,
    /// Base seed; drawn from the OS when absent and recorded in the output.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Evaluation budget per run; defaults per algorithm and function.
    #[serde(default)]
    pub total_eval: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Record wall-clock time per run. Off by default because it makes the
    /// output differ between otherwise identical runs.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub dpsea: DpseaParams,
    /// `dpsea.rs_merge` when given explicitly; otherwise each run resamples
    /// with its own `rs`.
    #[serde(skip)]
    pub dpsea_rs_merge: Option<usize>,
    #[serde(default)]
    pub cga: GaParams,
    #[serde(default)]
    pub de: DeConfig,
    #[serde(default)]
    pub pso: PsoConfig,
    #[serde(default)]
    pub regression: RegressionParams,
    #[serde(default)]
    pub success: SuccessSection,
}

fn default_noisy() -> bool {
    true
}

fn default_rs() -> Vec<usize> {
    vec![1]
}

impl ExperimentConfig {
    /// A config with every optional setting at its default.
    pub fn new(function: FunctionId, algo: Algo) -> Self {
        let mut cfg = Self::from_json_str(&format!(r#"{{"function": "{function}"}}"#)).expect("minimal config parses");
        cfg.algo = algo;
        cfg
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_value(value.clone()).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        if value.pointer("/dpsea/rs_merge").is_some() {
            cfg.dpsea_rs_merge = Some(cfg.dpsea.rs_merge);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn objective(&self) -> BenchmarkFunction {
        let f = BenchmarkFunction::with_dimension(
            self.function,
            self.dimension.unwrap_or(self.function.default_dimension()).max(1),
        );
        match self.rastrigin_constant {
            Some(c) => f.rastrigin_constant(c),
            None => f,
        }
    }

    pub fn sigmas(&self) -> Vec<f64> {
        match &self.sigma {
            Some(list) => list.clone(),
            None if self.noisy => vec![1.0],
            None => vec![0.0],
        }
    }

    pub fn repeats(&self) -> usize {
        self.repeats.unwrap_or(self.mode.default_repeats())
    }

    pub fn total_eval(&self) -> u64 {
        self.total_eval.unwrap_or(self.algo.default_total_eval(self.function))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("results"))
    }

    /// Checks everything a run would trip over, before any run starts.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.dimension == Some(0) {
            return fail("dimension must be positive".into());
        }
        if let Some(c) = self.rastrigin_constant {
            if !c.is_finite() {
                return fail("rastrigin_constant must be finite".into());
            }
        }
        let sigmas = self.sigmas();
        if sigmas.is_empty() {
            return fail("sigma list is empty".into());
        }
        if let Some(s) = sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return fail(format!("sigma {s} must be finite and nonnegative"));
        }
        if !self.noisy && sigmas.iter().any(|s| *s != 0.0) {
            return fail("noisy is false but the sigma list has nonzero entries".into());
        }
        if self.rs.is_empty() {
            return fail("rs list is empty".into());
        }
        if self.rs.contains(&0) {
            return fail("every rs must be at least 1".into());
        }
        if self.repeats() == 0 {
            return fail("repeats must be at least 1".into());
        }
        let total_eval = self.total_eval();
        if total_eval == 0 {
            return fail("total_eval must be positive".into());
        }
        if self.dpsea_rs_merge == Some(0) {
            return fail("dpsea.rs_merge must be at least 1".into());
        }
        for (name, eps) in FunctionId::ALL.iter().map(|f| (f.as_str(), self.success.epsilon.threshold(*f))) {
            if !(eps > 0.0 && eps.is_finite()) {
                return fail(format!("success.epsilon.{name} = {eps} must be positive"));
            }
        }
        match self.algo {
            Algo::Dpsea => {
                let params = DpseaParams {
                    regression: self.regression,
                    rs_merge: self.dpsea_rs_merge.unwrap_or(1),
                    max_total_eval: total_eval,
                    ..self.dpsea
                };
                params.validate()?;
            }
            Algo::Cga => {
                self.cga.validate()?;
                self.check_schedule(total_eval, self.cga.pop_size)?;
            }
            Algo::De => {
                self.de.validate()?;
                self.check_schedule(total_eval, self.de.pop_size)?;
            }
            Algo::Pso => {
                self.pso.validate()?;
                self.check_schedule(total_eval, self.pso.pop_size)?;
            }
        }
        Ok(())
    }

    fn check_schedule(&self, total_eval: u64, pop_size: usize) -> Result<()> {
        for &rs in &self.rs {
            total_iterations(total_eval, pop_size, rs)?;
        }
        Ok(())
    }
}
