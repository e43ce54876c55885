//! Qualitative labels for horizon behaviour and error-versus-confidence
//! curves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, Median, OrderStatistics, RankTieBreaker};

use crate::error::{Error, Result};
use crate::metrics::{ConfidenceErrorCurve, MetricBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QualLabel {
    Good,
    Moderate,
    Bad,
}

impl fmt::Display for QualLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QualLabel::Good => "Good",
            QualLabel::Moderate => "Moderate",
            QualLabel::Bad => "Bad",
        })
    }
}

impl FromStr for QualLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Good" => Ok(QualLabel::Good),
            "Moderate" => Ok(QualLabel::Moderate),
            "Bad" => Ok(QualLabel::Bad),
            other => Err(Error::Format(format!("unknown label `{other}`"))),
        }
    }
}

/// Cut-offs turning the verbal categories into numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum |Spearman ρ| counted as a trend.
    pub trend_rho: f64,
    /// Maximum (max − min)/|median| counted as roughly constant.
    pub max_spread: f64,
    /// Fraction of non-decreasing steps needed for Good.
    pub good_fraction: f64,
    /// Largest drop (relative to the curve range) allowed for Good.
    pub good_max_drop: f64,
    /// Fraction of non-decreasing steps needed for Moderate.
    pub moderate_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            trend_rho: 0.5,
            max_spread: 0.5,
            good_fraction: 0.9,
            good_max_drop: 0.1,
            moderate_fraction: 0.7,
        }
    }
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut data = Data::new(xs.to_vec());
    data.ranks(RankTieBreaker::Average)
}

/// Spearman rank correlation with average ranks for ties; 0 when either
/// series is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spearman needs paired samples");
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

fn relative_spread(xs: &[f64]) -> f64 {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let median = Data::new(xs.to_vec()).median();
    (hi - lo) / median.abs().max(1e-9)
}

pub fn classify_horizon(steps: &[MetricBundle]) -> Result<QualLabel> {
    classify_horizon_with(steps, &Thresholds::default())
}

/// Counts how many of the five horizon expectations hold: MAPE and MSE grow
/// with the step, R² falls, ECE and NLL stay roughly flat.
pub fn classify_horizon_with(steps: &[MetricBundle], t: &Thresholds) -> Result<QualLabel> {
    if steps.len() < 3 {
        return Err(Error::invalid(format!(
            "horizon labels need at least 3 steps, got {}",
            steps.len()
        )));
    }
    let idx: Vec<f64> = (1..=steps.len()).map(|s| s as f64).collect();
    let col = |f: fn(&MetricBundle) -> f64| steps.iter().map(f).collect::<Vec<_>>();
    let checks = [
        spearman(&col(|b| b.mape), &idx) >= t.trend_rho,
        spearman(&col(|b| b.mse), &idx) >= t.trend_rho,
        spearman(&col(|b| b.r2), &idx) <= -t.trend_rho,
        relative_spread(&col(|b| b.ece)) <= t.max_spread,
        relative_spread(&col(|b| b.nll)) <= t.max_spread,
    ];
    Ok(match checks.iter().filter(|c| **c).count() {
        s if s >= 3 => QualLabel::Good,
        2 => QualLabel::Moderate,
        _ => QualLabel::Bad,
    })
}

pub fn classify_conf_error(curve: &ConfidenceErrorCurve) -> Result<QualLabel> {
    classify_conf_error_with(curve, &Thresholds::default())
}

/// Good when the error rises with σ without oscillating, Moderate when it
/// mostly rises, Bad otherwise.
pub fn classify_conf_error_with(curve: &ConfidenceErrorCurve, t: &Thresholds) -> Result<QualLabel> {
    let mae = &curve.mae;
    if mae.len() < 3 {
        return Err(Error::invalid(format!(
            "curve labels need at least 3 points, got {}",
            mae.len()
        )));
    }
    let pairs = mae.len() - 1;
    let rising = mae.windows(2).filter(|w| w[1] >= w[0]).count();
    let f = rising as f64 / pairs as f64;
    let lo = mae.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mae.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let max_drop = mae
        .windows(2)
        .map(|w| (w[0] - w[1]).max(0.0))
        .fold(0.0, f64::max);
    let d = if range > 0.0 { max_drop / range } else { 0.0 };
    Ok(if f >= t.good_fraction && d <= t.good_max_drop {
        QualLabel::Good
    } else if f >= t.moderate_fraction {
        QualLabel::Moderate
    } else {
        QualLabel::Bad
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[3.0, 2.0, 1.0], &[1.0, 2.0, 3.0]) + 1.0).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn too_short_inputs() {
        let b = MetricBundle {
            mape: 1.0,
            mse: 1.0,
            r2: 0.5,
            ece: 0.1,
            nll: 1.0,
        };
        assert!(classify_horizon(&[b, b]).is_err());
        let c = ConfidenceErrorCurve {
            x: vec![0.0, 1.0],
            sigma_t: vec![0.0, 1.0],
            mae: vec![1.0, 2.0],
            retained: vec![2, 1],
        };
        assert!(classify_conf_error(&c).is_err());
    }
}
