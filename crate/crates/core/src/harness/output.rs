//! Result files. Every file is written to a temporary sibling and renamed
//! into place, so a failed run never leaves a truncated file behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Epsilons, ExperimentConfig, OutputFormat};
use super::stats::SummaryRow;
use super::RunRecord;
use crate::error::{Error, Result};

pub const RUNS_HEADER: [&str; 12] = [
    "function",
    "dimension",
    "noisy",
    "sigma",
    "algo",
    "rs",
    "repeat",
    "seed",
    "best_true_fitness",
    "total_eval",
    "success",
    "wall_ms",
];

const SUMMARY_HEADER: [&str; 11] = [
    "function",
    "dimension",
    "noisy",
    "sigma",
    "algo",
    "rs",
    "runs",
    "mean_best",
    "std_best",
    "mean_total_eval",
    "success_rate",
];

const MANIFEST_FILE: &str = "experiment.json";

/// Resolved settings of an experiment, written next to the results so that
/// `summarize` and `success` can interpret them later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub base_seed: u64,
    pub optimum_value: f64,
    pub epsilon: Epsilons,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, base_seed: u64) -> Self {
        let mut config = config.clone();
        config.seed = Some(base_seed);
        config.total_eval = Some(config.total_eval());
        config.repeats = Some(config.repeats());
        config.sigma = Some(config.sigmas());
        Self { base_seed, optimum_value: config.objective().optimum_value(), epsilon: config.success.epsilon, config }
    }
}

fn csv_string<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `runs.csv` contents for `records`, header included.
pub fn runs_csv_string(records: &[RunRecord]) -> Result<String> {
    csv_string(&RUNS_HEADER, records)
}

fn json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn file(dir: &Path, stem: &str, format: OutputFormat) -> PathBuf {
    dir.join(format!("{stem}.{}", format.extension()))
}

/// Writes `runs.*`, `summary.*` and the manifest into `dir`, creating it
/// if needed.
pub fn write_outputs(
    dir: &Path,
    format: OutputFormat,
    records: &[RunRecord],
    summary: &[SummaryRow],
    manifest: &Manifest,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let runs = match format {
        OutputFormat::Csv => runs_csv_string(records)?,
        OutputFormat::Json => json_string(records)?,
    };
    write_atomic(&file(dir, "runs", format), &runs)?;
    write_summary(dir, format, summary)?;
    write_atomic(&dir.join(MANIFEST_FILE), &json_string(manifest)?)
}

pub fn write_summary(dir: &Path, format: OutputFormat, summary: &[SummaryRow]) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => csv_string(&SUMMARY_HEADER, summary)?,
        OutputFormat::Json => json_string(summary)?,
    };
    write_atomic(&file(dir, "summary", format), &text)
}

/// Reads `runs.csv`, or `runs.json` when there is no CSV, from `dir`.
pub fn read_runs(dir: &Path) -> Result<(Vec<RunRecord>, OutputFormat)> {
    let csv_path = file(dir, "runs", OutputFormat::Csv);
    if csv_path.exists() {
        let mut reader = csv::Reader::from_path(&csv_path)?;
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        if header != RUNS_HEADER {
            return Err(Error::Config(format!(
                "{} has an unexpected header: {}",
                csv_path.display(),
                header.join(",")
            )));
        }
        let records = reader.deserialize().collect::<std::result::Result<Vec<RunRecord>, _>>()?;
        return Ok((records, OutputFormat::Csv));
    }
    let json_path = file(dir, "runs", OutputFormat::Json);
    if json_path.exists() {
        let records = serde_json::from_str(&fs::read_to_string(&json_path)?)?;
        return Ok((records, OutputFormat::Json));
    }
    Err(Error::Config(format!("no runs.csv or runs.json in {}", dir.display())))
}

pub fn read_summary(dir: &Path, format: OutputFormat) -> Result<Vec<SummaryRow>> {
    let path = file(dir, "summary", format);
    match format {
        OutputFormat::Csv => {
            let rows = csv::Reader::from_path(&path)?.deserialize().collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(rows)
        }
        OutputFormat::Json => Ok(serde_json::from_str(&fs::read_to_string(&path)?)?),
    }
}

/// The manifest in `dir`, if one was written.
pub fn read_manifest(dir: &Path) -> Result<Option<Manifest>> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&fs::read_to_string(&path)?)?))
}
