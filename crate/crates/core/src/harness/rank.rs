//! Per-metric rankings of the twelve architecture × method rows.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::classify::QualLabel;
use crate::error::{Error, Result};
use crate::metrics::MetricBundle;
use crate::neural::{Architecture, UqMethod};

/// The twelve rows in table order: every MLP method, then every LSTM method.
pub fn canonical_rows() -> Vec<(Architecture, UqMethod)> {
    Architecture::ALL
        .iter()
        .flat_map(|&a| UqMethod::ALL.iter().map(move |&m| (a, m)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub architecture: Architecture,
    pub method: UqMethod,
    pub bundle: MetricBundle,
    pub horizon: Option<QualLabel>,
    pub conf_error: Option<QualLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub architecture: Architecture,
    pub method: UqMethod,
    pub mape: usize,
    pub mse: usize,
    pub r2: usize,
    pub ece: usize,
    pub nll: usize,
    pub horizon: Option<QualLabel>,
    pub conf_error: Option<QualLabel>,
}

impl RankRow {
    pub fn label(&self) -> String {
        format!("{} {}", self.architecture, self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub rows: Vec<RankRow>,
}

/// Ranks 1..n of `values`; lower is better unless `descending`. Equal values
/// keep their input order.
fn rank_column(values: &[f64], descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        let ord = if descending { ord.reverse() } else { ord };
        // -0.0 and 0.0 compare unequal under total_cmp; treat them as a tie
        let ord = if values[a] == values[b] {
            Ordering::Equal
        } else {
            ord
        };
        ord.then(a.cmp(&b))
    });
    let mut ranks = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// Ranks the twelve rows on every metric: ascending for MAPE, MSE, ECE and
/// NLL, descending for R².
pub fn rank_models(entries: &[RankEntry]) -> Result<RankingTable> {
    let rows = canonical_rows();
    let mut ordered = Vec::with_capacity(rows.len());
    for (arch, method) in &rows {
        let mut hits = entries
            .iter()
            .filter(|e| e.architecture == *arch && e.method == *method);
        match (hits.next(), hits.next()) {
            (Some(e), None) => ordered.push(e),
            (None, _) => {
                return Err(Error::invalid(format!(
                    "ranking is missing {arch} {method}"
                )))
            }
            (Some(_), Some(_)) => {
                return Err(Error::invalid(format!("ranking has {arch} {method} twice")))
            }
        }
    }
    if entries.len() != rows.len() {
        return Err(Error::invalid(format!(
            "ranking needs exactly {} models, got {}",
            rows.len(),
            entries.len()
        )));
    }
    let col = |f: fn(&MetricBundle) -> f64, desc: bool| {
        rank_column(
            &ordered.iter().map(|e| f(&e.bundle)).collect::<Vec<_>>(),
            desc,
        )
    };
    let mape = col(|b| b.mape, false);
    let mse = col(|b| b.mse, false);
    let r2 = col(|b| b.r2, true);
    let ece = col(|b| b.ece, false);
    let nll = col(|b| b.nll, false);
    let rows = ordered
        .iter()
        .enumerate()
        .map(|(i, e)| RankRow {
            architecture: e.architecture,
            method: e.method,
            mape: mape[i],
            mse: mse[i],
            r2: r2[i],
            ece: ece[i],
            nll: nll[i],
            horizon: e.horizon,
            conf_error: e.conf_error,
        })
        .collect();
    Ok(RankingTable { rows })
}
