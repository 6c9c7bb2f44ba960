//! Result-file emission: per-run JSON-lines metrics and the suite summary
//! CSV.
//!
//! These files are the machine-readable contract (stdout is human-oriented
//! and unstable). Identical configs and seeds must reproduce them byte for
//! byte, so nothing time- or environment-dependent is written and every
//! field serializes deterministically. Each artifact embeds the fully
//! resolved config and tool version.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::ExperimentConfig;
use crate::error::{Error, Result};
use crate::trainer::{RunMetrics, SuiteConfig, SuiteResult};

/// One JSONL line: an evaluation point of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub r#type: String,
    pub benchmark: u32,
    pub case: String,
    pub method: String,
    pub seed: u64,
    pub iteration: usize,
    pub train_loss: Option<f64>,
    pub test_rmse: f64,
}

/// Final JSONL line of a run: the summary with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub r#type: String,
    pub benchmark: u32,
    pub case: String,
    pub method: String,
    pub seed: u64,
    pub final_rmse: f64,
    pub iterations: usize,
    pub version: String,
    pub config: ExperimentConfig,
}

/// Writes one run as JSON lines: every trace point as an `eval` record, then
/// one `summary` record embedding the resolved config and tool version.
pub fn write_run_jsonl(
    metrics: &RunMetrics,
    config: &ExperimentConfig,
    path: &Path,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let case = metrics.case.to_string();
    let method = metrics.method.label().to_string();
    for point in &metrics.trace {
        let record = EvalRecord {
            r#type: "eval".into(),
            benchmark: metrics.benchmark_id,
            case: case.clone(),
            method: method.clone(),
            seed: metrics.seed,
            iteration: point.iteration,
            train_loss: point.train_loss,
            test_rmse: point.test_rmse,
        };
        serde_json::to_writer(&mut w, &record).map_err(|e| Error::format(path, e.to_string()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    let summary = SummaryRecord {
        r#type: "summary".into(),
        benchmark: metrics.benchmark_id,
        case,
        method,
        seed: metrics.seed,
        final_rmse: metrics.final_rmse,
        iterations: metrics.trace.last().map_or(0, |p| p.iteration),
        version: crate::VERSION.to_string(),
        config: config.clone(),
    };
    serde_json::to_writer(&mut w, &summary).map_err(|e| Error::format(path, e.to_string()))?;
    w.write_all(b"\n").map_err(io)?;
    w.flush().map_err(io)
}

/// A run read back from a metrics file, as needed for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRun {
    pub benchmark: u32,
    pub case: String,
    pub method: String,
    pub seed: u64,
    /// (iteration, test_rmse) points in file order.
    pub points: Vec<(usize, f64)>,
}

/// Parses the `eval` records of one JSONL metrics file.
pub fn read_run_jsonl(path: &Path) -> Result<PlotRun> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut run: Option<PlotRun> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::format(path, format!("line {}: {e}", lineno + 1)))?;
        if value.get("type").and_then(|t| t.as_str()) != Some("eval") {
            continue;
        }
        let record: EvalRecord = serde_json::from_value(value)
            .map_err(|e| Error::format(path, format!("line {}: {e}", lineno + 1)))?;
        let run = run.get_or_insert_with(|| PlotRun {
            benchmark: record.benchmark,
            case: record.case.clone(),
            method: record.method.clone(),
            seed: record.seed,
            points: Vec::new(),
        });
        run.points.push((record.iteration, record.test_rmse));
    }
    run.ok_or_else(|| Error::format(path, "no eval records found"))
}

/// Writes the suite summary CSV: a provenance comment line, the header, then
/// one row per cell with columns benchmark, case, method, mean_rmse,
/// std_rmse, seeds. The seeds column reads `ok/total`; cells whose runs all
/// failed carry NaN statistics.
pub fn write_suite_csv(result: &SuiteResult, suite: &SuiteConfig, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let config_json = serde_json::to_string(suite)
        .map_err(|e| Error::Config(format!("serializing suite config: {e}")))?;
    writeln!(w, "# esc-bench {} config={config_json}", crate::VERSION).map_err(io)?;
    writeln!(w, "benchmark,case,method,mean_rmse,std_rmse,seeds").map_err(io)?;
    for cell in &result.cells {
        writeln!(
            w,
            "{},{},{},{},{},{}/{}",
            cell.benchmark,
            cell.case,
            cell.method,
            cell.mean_rmse,
            cell.std_rmse,
            cell.n_seeds,
            cell.n_seeds + cell.n_failed,
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Renders the summary as an aligned text table for stdout.
pub fn format_suite_table(result: &SuiteResult) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:<6} {:<8} {:>12} {:>12} {:>7}\n",
        "benchmark", "case", "method", "mean_rmse", "std_rmse", "seeds"
    ));
    for cell in &result.cells {
        out.push_str(&format!(
            "{:<10} {:<6} {:<8} {:>12.4} {:>12.4} {:>5}/{}\n",
            cell.benchmark,
            cell.case.to_string(),
            cell.method,
            cell.mean_rmse,
            cell.std_rmse,
            cell.n_seeds,
            cell.n_seeds + cell.n_failed,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Method, SetSizeMode};
    use crate::trainer::TracePoint;

    fn fake_metrics() -> RunMetrics {
        RunMetrics {
            benchmark_id: 1,
            case: SetSizeMode::Fixed(4),
            method: Method::Esc,
            seed: 3,
            trace: vec![
                TracePoint {
                    iteration: 0,
                    train_loss: None,
                    test_rmse: 10.0,
                },
                TracePoint {
                    iteration: 50,
                    train_loss: Some(2.5),
                    test_rmse: 4.0,
                },
            ],
            final_rmse: 4.0,
            wall_time_secs: 123.0,
        }
    }

    #[test]
    fn jsonl_roundtrip_for_plotting() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.jsonl");
        let metrics = fake_metrics();
        let cfg = crate::presets::desk_experiment();
        write_run_jsonl(&metrics, &cfg, &path).unwrap();

        let run = read_run_jsonl(&path).unwrap();
        assert_eq!(run.benchmark, 1);
        assert_eq!(run.case, "M4");
        assert_eq!(run.method, "ESC");
        assert_eq!(run.points, vec![(0, 10.0), (50, 4.0)]);

        // wall time must not leak into the file
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains("wall_time"));
        assert!(text.lines().last().unwrap().contains("\"type\":\"summary\""));
        assert!(text.lines().last().unwrap().contains("\"config\""));
    }

    #[test]
    fn jsonl_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        let metrics = fake_metrics();
        let cfg = crate::presets::desk_experiment();
        write_run_jsonl(&metrics, &cfg, &p1).unwrap();
        write_run_jsonl(&metrics, &cfg, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }
}
