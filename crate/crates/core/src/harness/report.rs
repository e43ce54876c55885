//! Report files. Layout under the output root:
//!
//! ```text
//! <dataset>/<arch>_<method>/metrics.json
//!                           per_horizon.csv
//!                           reliability.csv
//!                           conf_error.csv
//!                           predictions.csv
//!                           checkpoints/
//! <dataset>/ranking.csv
//! <dataset>/ranking.txt
//! ```
//!
//! Every file is written to a temp sibling and renamed into place.

use std::path::{Path, PathBuf};

use super::classify::QualLabel;
use super::rank::{canonical_rows, RankRow, RankingTable};
use super::{ExperimentRun, MetricReport, TrainedRun};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::metrics::MetricBundle;
use crate::neural::{save_checkpoint, Architecture, UqMethod};
use crate::uq::write_predictions;

pub fn model_dir_name(architecture: Architecture, method: UqMethod) -> String {
    format!("{}_{}", architecture.key(), method.key())
}

/// 17 significant digits: enough to read back the exact `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(format!("CSV encoding failed: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| Error::Format(format!("CSV encoding failed: {e}")))
}

fn bundle_row(prefix: String, b: &MetricBundle) -> Vec<String> {
    vec![
        prefix,
        num(b.mape),
        num(b.mse),
        num(b.r2),
        num(b.ece),
        num(b.nll),
    ]
}

fn write_checkpoints(dir: &Path, run: &TrainedRun, seed: u64) -> Result<()> {
    if dir.exists() {
        std::fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    if run.models.len() == 1 {
        return save_checkpoint(dir.join("model.json"), &run.models[0], seed);
    }
    for (k, m) in run.models.iter().enumerate() {
        save_checkpoint(dir.join(format!("member_{k:02}.json")), m, seed)?;
    }
    Ok(())
}

/// Writes one experiment's files and returns its directory.
pub fn emit_report(run: &ExperimentRun, out_root: &Path) -> Result<PathBuf> {
    let r = &run.report;
    let dir = out_root
        .join(&r.dataset)
        .join(model_dir_name(r.architecture, r.method));
    let json_path = dir.join("metrics.json");
    let json = serde_json::to_string_pretty(r).map_err(|e| Error::Json {
        path: json_path.clone(),
        source: e,
    })?;
    write_atomic(&json_path, json.as_bytes())?;

    let header = ["step", "mape", "mse", "r2", "ece", "nll"];
    let steps: Vec<Vec<String>> = if r.per_step.is_empty() {
        vec![bundle_row("1".into(), &r.summary)]
    } else {
        r.per_step
            .iter()
            .enumerate()
            .map(|(k, b)| bundle_row((k + 1).to_string(), b))
            .collect()
    };
    write_atomic(&dir.join("per_horizon.csv"), &csv_bytes(&header, steps)?)?;

    let rel = r
        .reliability
        .levels
        .iter()
        .zip(&r.reliability.coverage)
        .map(|(p, c)| vec![num(*p), num(*c)]);
    write_atomic(
        &dir.join("reliability.csv"),
        &csv_bytes(&["level", "coverage"], rel)?,
    )?;

    let ce = &r.conf_error;
    let rows = (0..ce.x.len()).map(|k| {
        vec![
            num(ce.x[k]),
            num(ce.sigma_t[k]),
            num(ce.mae[k]),
            ce.retained[k].to_string(),
        ]
    });
    write_atomic(
        &dir.join("conf_error.csv"),
        &csv_bytes(&["x", "sigma_t", "mae", "retained"], rows)?,
    )?;

    write_predictions(
        dir.join("predictions.csv"),
        &run.single.test.y,
        &run.single.prediction,
    )?;
    write_checkpoints(&dir.join("checkpoints"), &run.single, run.config.seed)?;
    if let Some(sweep) = &run.sweep {
        write_predictions(
            dir.join("sweep_predictions.csv"),
            &sweep.test.y,
            &sweep.prediction,
        )?;
        write_checkpoints(&dir.join("sweep_checkpoints"), sweep, run.config.seed)?;
    }
    Ok(dir)
}

pub fn load_report(model_dir: &Path) -> Result<MetricReport> {
    let path = model_dir.join("metrics.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json { path, source: e })
}

/// Every report found under a dataset directory, in table order.
pub fn load_reports(dataset_dir: &Path) -> Result<Vec<MetricReport>> {
    let mut out = Vec::new();
    for (a, m) in canonical_rows() {
        let dir = dataset_dir.join(model_dir_name(a, m));
        if dir.join("metrics.json").is_file() {
            out.push(load_report(&dir)?);
        }
    }
    Ok(out)
}

fn label(l: Option<QualLabel>) -> String {
    l.map_or_else(|| "n/a".to_string(), |l| l.to_string())
}

const RANK_HEADER: [&str; 9] = [
    "architecture",
    "method",
    "mape",
    "mse",
    "r2",
    "ece",
    "nll",
    "horizon",
    "conf_error",
];

/// Fixed-width text version of the ranking table.
pub fn render_ranking(table: &RankingTable) -> String {
    let head = [
        "Model",
        "MAPE",
        "MSE",
        "R2",
        "ECE",
        "NLL",
        "Horizon",
        "Conf-error",
    ];
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.label(),
                r.mape.to_string(),
                r.mse.to_string(),
                r.r2.to_string(),
                r.ece.to_string(),
                r.nll.to_string(),
                label(r.horizon),
                label(r.conf_error),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..head.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([head[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(head.to_vec());
    for r in &rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

/// Writes `ranking.csv` and `ranking.txt` into a dataset directory.
pub fn emit_ranking(table: &RankingTable, dataset_dir: &Path) -> Result<()> {
    let rows = table.rows.iter().map(|r| {
        vec![
            r.architecture.key().to_string(),
            r.method.key().to_string(),
            r.mape.to_string(),
            r.mse.to_string(),
            r.r2.to_string(),
            r.ece.to_string(),
            r.nll.to_string(),
            label(r.horizon),
            label(r.conf_error),
        ]
    });
    write_atomic(
        &dataset_dir.join("ranking.csv"),
        &csv_bytes(&RANK_HEADER, rows)?,
    )?;
    write_atomic(
        &dataset_dir.join("ranking.txt"),
        render_ranking(table).as_bytes(),
    )
}

pub fn read_ranking_csv(path: &Path) -> Result<RankingTable> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        .clone();
    if headers.iter().ne(RANK_HEADER) {
        return Err(Error::Format(format!(
            "{}: unexpected ranking header",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Row {
            line,
            message: e.to_string(),
        })?;
        let bad = |m: String| Error::Row { line, message: m };
        let rank = |i: usize| {
            rec[i]
                .parse::<usize>()
                .map_err(|e| bad(format!("{}: {e}", RANK_HEADER[i])))
        };
        let lab = |i: usize| -> Result<Option<QualLabel>> {
            match &rec[i] {
                "n/a" => Ok(None),
                s => s.parse().map(Some),
            }
        };
        rows.push(RankRow {
            architecture: rec[0].parse().map_err(|e: Error| bad(e.to_string()))?,
            method: rec[1].parse().map_err(|e: Error| bad(e.to_string()))?,
            mape: rank(2)?,
            mse: rank(3)?,
            r2: rank(4)?,
            ece: rank(5)?,
            nll: rank(6)?,
            horizon: lab(7)?,
            conf_error: lab(8)?,
        });
    }
    Ok(RankingTable { rows })
}
