use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use granular::RunTrace;
use serde::Deserialize;

use crate::config::Algorithm;
use crate::run::write;

#[derive(Deserialize)]
struct MetricsHeader {
    algorithm: Algorithm,
}

#[derive(Deserialize)]
struct Prediction {
    object: usize,
    actual: f64,
    predicted: f64,
    recognized: bool,
}

const MEMBERSHIP_HEADER: &str = "input,rule,x,mu";

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))
}

/// Files a complete run directory must hold.
fn missing_artifacts(run_dir: &Path) -> Vec<&'static str> {
    let mut required = vec!["metrics.json", "trace.json", "predictions.csv"];
    if let Ok(text) = fs::read_to_string(run_dir.join("metrics.json")) {
        if let Ok(MetricsHeader { algorithm: Algorithm::Sonfis }) = serde_json::from_str(&text) {
            required.push("membership.csv");
        }
    }
    required.into_iter().filter(|name| !run_dir.join(name).is_file()).collect()
}

fn error_vs_iteration(trace: &RunTrace) -> String {
    let mut out = String::from("iteration,neurons,error,best_so_far\n");
    let mut best = f64::INFINITY;
    for r in &trace.records {
        best = best.min(r.error);
        let _ = writeln!(out, "{},{},{},{best}", r.iteration, r.neurons, r.error);
    }
    out
}

fn strength_vs_iteration(trace: &RunTrace) -> String {
    let mut out = String::from("iteration,strength,error\n");
    for r in &trace.records {
        let strength = r.strength.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{strength},{}", r.iteration, r.error);
    }
    out
}

fn em_grid(trace: &RunTrace) -> String {
    let mut out = String::from("neurons,reduced_objects,em\n");
    for r in &trace.records {
        let _ = writeln!(out, "{},{},{}", r.neurons, r.reduced_objects, r.error);
    }
    out
}

fn predicted_vs_actual(text: &str) -> Result<String> {
    let mut out = String::from("object,actual,predicted,recognized\n");
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for row in reader.deserialize() {
        let p: Prediction = row.context("malformed predictions.csv")?;
        let _ = writeln!(out, "{},{},{},{}", p.object, p.actual, p.predicted, p.recognized);
    }
    Ok(out)
}

/// Writes plot-ready CSV files for the run in `run_dir` into `out`, returning
/// the file names written.
pub fn report(run_dir: &Path, out: &Path) -> Result<Vec<&'static str>> {
    let missing = missing_artifacts(run_dir);
    if !missing.is_empty() {
        bail!("{} is not a complete run directory; missing: {}", run_dir.display(), missing.join(", "));
    }
    let header: MetricsHeader = serde_json::from_str(&read(run_dir, "metrics.json")?).context("malformed metrics.json")?;
    let trace: RunTrace = serde_json::from_str(&read(run_dir, "trace.json")?).context("malformed trace.json")?;
    let scatter = predicted_vs_actual(&read(run_dir, "predictions.csv")?)?;

    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut written = vec!["error_vs_iteration.csv", "predicted_vs_actual.csv"];
    write(out, "error_vs_iteration.csv", error_vs_iteration(&trace))?;
    write(out, "predicted_vs_actual.csv", scatter)?;
    match header.algorithm {
        Algorithm::Sonfis => {
            let membership = read(run_dir, "membership.csv")?;
            if membership.lines().next() != Some(MEMBERSHIP_HEADER) {
                bail!("membership.csv does not start with `{MEMBERSHIP_HEADER}`");
            }
            write(out, "membership_curves.csv", membership)?;
            written.push("membership_curves.csv");
        }
        Algorithm::Sorst => {
            write(out, "strength_vs_iteration.csv", strength_vs_iteration(&trace))?;
            write(out, "em_grid.csv", em_grid(&trace))?;
            written.extend(["strength_vs_iteration.csv", "em_grid.csv"]);
        }
    }
    Ok(written)
}
