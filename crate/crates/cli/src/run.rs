use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use granular::nfis::membership_report;
use granular::table::{generate_synthetic, ingest_csv_with, split};
use granular::{run_sonfis, run_sorst, InformationTable, PredictionRecord, RunTrace, StrengthFactor};
use log::info;
use serde::Serialize;

use crate::config::{Algorithm, DataSource, ExperimentConfig};

pub fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn json(value: &impl Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn load_data(source: &DataSource) -> Result<InformationTable> {
    match source {
        DataSource::Csv {
            path,
            decision_column,
            missing,
        } => ingest_csv_with(path, decision_column, *missing).with_context(|| format!("cannot load {}", path.display())),
        DataSource::Synthetic(synthetic) => generate_synthetic(synthetic).context("cannot generate synthetic data"),
    }
}

/// Writes the synthetic table described by the config to `out`.
pub fn generate(config: &DataSource, out: &Path) -> Result<()> {
    let DataSource::Synthetic(synthetic) = config else {
        anyhow::bail!("`generate` needs a `data.synthetic` section");
    };
    let table = generate_synthetic(synthetic)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    table.write_csv(out).with_context(|| format!("cannot write {}", out.display()))?;
    info!("wrote {} objects to {}", table.len(), out.display());
    Ok(())
}

pub fn predictions_csv(predictions: &[PredictionRecord]) -> String {
    let mut out = String::from("object,actual,predicted,recognized\n");
    for (i, p) in predictions.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", i + 1, p.actual, p.predicted, p.recognized));
    }
    out
}

#[derive(Serialize)]
pub struct Metrics {
    pub algorithm: Algorithm,
    /// `rmse` for SONFIS, `em` for SORST.
    pub metric: String,
    pub best_iteration: usize,
    pub best_error: f64,
    pub train_objects: usize,
    pub test_objects: usize,
    pub recognized: usize,
}

fn metrics(config: &ExperimentConfig, trace: &RunTrace, train: usize, predictions: &[PredictionRecord]) -> Metrics {
    let best = trace.best().expect("a run has at least one iteration");
    Metrics {
        algorithm: config.algorithm,
        metric: match config.algorithm {
            Algorithm::Sonfis => "rmse".into(),
            Algorithm::Sorst => "em".into(),
        },
        best_iteration: best.iteration,
        best_error: best.error,
        train_objects: train,
        test_objects: predictions.len(),
        recognized: predictions.iter().filter(|p| p.recognized).count(),
    }
}

pub fn run(config: &ExperimentConfig, out: &Path) -> Result<PathBuf> {
    let table = load_data(&config.data)?;
    let (train, test) = split(&table, &config.split).context("cannot split data")?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;

    let (trace, predictions) = match config.algorithm {
        Algorithm::Sonfis => {
            let outcome = run_sonfis(&train, &test, &config.meta, &config.growth).context("SONFIS run failed")?;
            write(out, "rulebase.json", json(&outcome.rule_base)?)?;
            write(out, "membership.csv", membership_report(&outcome.rule_base).to_csv())?;
            (outcome.trace, outcome.predictions)
        }
        Algorithm::Sorst => {
            let strength = StrengthFactor::new(config.initial_strength)?;
            let outcome = run_sorst(&train, &test, &config.meta, strength).context("SORST run failed")?;
            write(out, "rules.txt", outcome.rules.to_text())?;
            write(out, "rules.json", json(&outcome.rules)?)?;
            write(out, "scheme.json", json(&outcome.scheme)?)?;
            (outcome.trace, outcome.predictions)
        }
    };
    write(out, "config.json", json(config)?)?;
    write(out, "trace.csv", trace.to_csv_string())?;
    write(out, "trace.json", json(&trace)?)?;
    write(out, "predictions.csv", predictions_csv(&predictions))?;
    let summary = metrics(config, &trace, train.len(), &predictions);
    write(out, "metrics.json", json(&summary)?)?;
    info!(
        "{} best {} = {} at iteration {}; artifacts in {}",
        match config.algorithm {
            Algorithm::Sonfis => "SONFIS",
            Algorithm::Sorst => "SORST",
        },
        summary.metric,
        summary.best_error,
        summary.best_iteration,
        out.display()
    );
    Ok(out.to_path_buf())
}
