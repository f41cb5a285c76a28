//! `dpsea` command-line runner.
//!
//! ```text
//! dpsea run --config exp.json [--algo A] [--function F] [--rs 1,5] [--sigma 0,0.5]
//!           [--repeats N] [--seed S] [--out DIR] [--format csv|json] [--timing]
//! dpsea summarize --in DIR
//! dpsea success --in DIR [--epsilon E]
//! ```
//!
//! Exit codes: 0 on success, 2 when the output location cannot be written,
//! 1 for every other failure (bad config, failed run, unreadable input).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use dpsea::benchmark::{BenchmarkFunction, FunctionId};
use dpsea::harness::{
    read_manifest, read_runs, run_experiment, success_rates, summarize, threads_from_env, write_outputs, write_summary,
    Algo, ExperimentConfig, Manifest, OutputFormat, SummaryRow,
};
use dpsea::stochastics::RngState;

#[derive(Parser, Debug)]
#[command(name = "dpsea", version, about = "Noisy optimization experiments with DPSEA and baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a sweep and write runs and summary files.
    Run(RunArgs),
    /// Recompute the summary of an existing result directory.
    Summarize {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
    },
    /// Success rate per noise level for an existing result directory.
    Success {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        /// Threshold on best fitness minus optimum, for every function.
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long)]
    algo: Option<Algo>,
    #[arg(long)]
    function: Option<FunctionId>,
    /// Comma-separated resampling counts.
    #[arg(long, value_delimiter = ',')]
    rs: Option<Vec<usize>>,
    /// Comma-separated noise standard deviations.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Record per-run wall time (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
}

/// Failure to write results, reported with exit code 2.
#[derive(Debug)]
struct OutputError(anyhow::Error);

impl std::fmt::Display for OutputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for OutputError {}

fn output_error(e: impl Into<anyhow::Error>) -> anyhow::Error {
    OutputError(e.into()).into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Summarize { input } => summarize_dir(&input),
        Command::Success { input, epsilon } => success(&input, epsilon),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<OutputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) {
    if let Some(algo) = args.algo {
        cfg.algo = algo;
    }
    if let Some(function) = args.function {
        if function != cfg.function {
            cfg.dimension = None;
            cfg.rastrigin_constant = None;
        }
        cfg.function = function;
    }
    if let Some(rs) = &args.rs {
        cfg.rs = rs.clone();
    }
    if let Some(sigma) = &args.sigma {
        cfg.sigma = Some(sigma.clone());
    }
    if args.repeats.is_some() {
        cfg.repeats = args.repeats;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if let Some(format) = args.format {
        cfg.format = format;
    }
    cfg.timing |= args.timing;
}

/// Creates `dir` and checks that files can be created in it.
fn prepare_output(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write into {}", dir.display()))?;
    Ok(())
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    apply_overrides(&mut cfg, &args);
    cfg.validate()?;
    let threads = threads_from_env()?;
    let base_seed = cfg.seed.unwrap_or_else(RngState::entropy_seed);
    let dir = cfg.out_dir();
    prepare_output(&dir).map_err(output_error)?;

    let records = run_experiment(&cfg, base_seed, threads)?;
    let summary = summarize(&records);
    write_outputs(&dir, cfg.format, &records, &summary, &Manifest::new(&cfg, base_seed))
        .with_context(|| format!("cannot write results to {}", dir.display()))
        .map_err(output_error)?;
    print_summary(&summary);
    eprintln!("{} runs written to {} (base seed {base_seed})", records.len(), dir.display());
    Ok(())
}

fn summarize_dir(dir: &Path) -> anyhow::Result<()> {
    let (records, format) = read_runs(dir)?;
    let summary = summarize(&records);
    write_summary(dir, format, &summary)
        .with_context(|| format!("cannot write summary to {}", dir.display()))
        .map_err(output_error)?;
    print_summary(&summary);
    Ok(())
}

fn success(dir: &Path, epsilon: Option<f64>) -> anyhow::Result<()> {
    let (records, _) = read_runs(dir)?;
    let manifest = read_manifest(dir)?;
    let mut eps = manifest.as_ref().map(|m| m.epsilon).unwrap_or_default();
    if let Some(e) = epsilon {
        if !(e > 0.0 && e.is_finite()) {
            bail!("--epsilon must be positive, got {e}");
        }
        for f in FunctionId::ALL {
            eps.set(f, e);
        }
    }
    // The manifest knows the Rastrigin constant; without one the default
    // constant is assumed.
    let optimum = |function: FunctionId, dimension: usize| match &manifest {
        Some(m) if m.config.function == function && m.config.objective().dimension == dimension => m.optimum_value,
        _ => BenchmarkFunction::with_dimension(function, dimension).optimum_value(),
    };
    let rows = success_rates(&records, &eps, optimum);

    let mut columns: Vec<String> = Vec::new();
    let mut sigmas: Vec<f64> = Vec::new();
    for r in &rows {
        let col = format!("{} rs={} ({})", r.function, r.rs, r.algo);
        if !columns.contains(&col) {
            columns.push(col);
        }
        if !sigmas.iter().any(|s| s.to_bits() == r.sigma.to_bits()) {
            sigmas.push(r.sigma);
        }
    }
    print!("{:>8}", "sigma");
    for c in &columns {
        print!("  {c:>24}");
    }
    println!();
    for s in &sigmas {
        print!("{s:>8}");
        for c in &columns {
            let cell = rows
                .iter()
                .find(|r| r.sigma.to_bits() == s.to_bits() && format!("{} rs={} ({})", r.function, r.rs, r.algo) == *c);
            match cell {
                Some(r) => print!("  {:>24}", format!("{}% ({}/{})", r.rate, r.successes, r.runs)),
                None => print!("  {:>24}", "-"),
            }
        }
        println!();
    }
    Ok(())
}

fn print_summary(rows: &[SummaryRow]) {
    println!(
        "{:<11} {:>4} {:>6} {:>6} {:>4} {:>5} {:>13} {:>11} {:>11} {:>8}",
        "function", "dim", "sigma", "algo", "rs", "runs", "mean_best", "std_best", "mean_eval", "success"
    );
    for r in rows {
        println!(
            "{:<11} {:>4} {:>6} {:>6} {:>4} {:>5} {:>13.5e} {:>11.3e} {:>11.0} {:>7}%",
            r.function.as_str(),
            r.dimension,
            r.sigma,
            r.algo.as_str(),
            r.rs,
            r.runs,
            r.mean_best,
            r.std_best,
            r.mean_total_eval,
            r.success_rate
        );
    }
}
