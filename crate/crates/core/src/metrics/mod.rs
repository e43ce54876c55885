//! Point-error metrics, Gaussian NLL, interval calibration and the
//! error-versus-confidence curve.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataio::TargetScale;
use crate::error::{Error, Result};
use crate::ndcore::Tensor;

/// Targets with smaller magnitude are skipped by [`mape`].
pub const MAPE_EPSILON: f64 = 1e-6;
/// Lower bound applied to predicted standard deviations.
pub const SIGMA_FLOOR: f64 = 1e-6;
pub const CONF_STEPS: usize = 20;

/// Nominal central-interval probabilities 0.1, 0.2, …, 0.9.
pub fn default_levels() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

fn check_pair(y: &Tensor, mu: &Tensor) -> Result<()> {
    if y.shape() != mu.shape() {
        return Err(Error::invalid(format!(
            "targets {:?} and predictions {:?} differ in shape",
            y.shape(),
            mu.shape()
        )));
    }
    if y.is_empty() {
        return Err(Error::invalid("no predictions to score"));
    }
    Ok(())
}

fn floored(sigma: &Tensor, y: &Tensor) -> Result<Vec<f64>> {
    if sigma.shape() != y.shape() {
        return Err(Error::invalid(format!(
            "σ {:?} does not match targets {:?}",
            sigma.shape(),
            y.shape()
        )));
    }
    sigma
        .data()
        .iter()
        .map(|&s| {
            let s = s.max(SIGMA_FLOOR);
            if s.is_finite() {
                Ok(s)
            } else {
                Err(Error::invalid(format!(
                    "σ must be positive and finite, got {s}"
                )))
            }
        })
        .collect()
}

/// Mean absolute percentage error (in percent) over targets with
/// `|y| ≥ 1e-6`.
pub fn mape(y: &Tensor, mu: &Tensor) -> Result<f64> {
    check_pair(y, mu)?;
    let (sum, count) = y
        .data()
        .iter()
        .zip(mu.data())
        .filter(|(t, _)| t.abs() >= MAPE_EPSILON)
        .fold((0.0, 0usize), |(s, c), (t, m)| {
            (s + ((t - m) / t).abs(), c + 1)
        });
    if count == 0 {
        return Err(Error::UndefinedMetric("MAPE: every target is zero".into()));
    }
    Ok(100.0 * sum / count as f64)
}

pub fn mse(y: &Tensor, mu: &Tensor) -> Result<f64> {
    check_pair(y, mu)?;
    let sse: f64 = y
        .data()
        .iter()
        .zip(mu.data())
        .map(|(t, m)| (t - m) * (t - m))
        .sum();
    Ok(sse / y.len() as f64)
}

/// Coefficient of determination.
pub fn r2(y: &Tensor, mu: &Tensor) -> Result<f64> {
    check_pair(y, mu)?;
    let mean = y.mean();
    let ss_tot: f64 = y.data().iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedMetric("R²: targets are constant".into()));
    }
    let sse: f64 = y
        .data()
        .iter()
        .zip(mu.data())
        .map(|(t, m)| (t - m) * (t - m))
        .sum();
    Ok(1.0 - sse / ss_tot)
}

/// Gaussian negative log-likelihood, `mean(ln σ² + (y−μ)²/σ²)`, with σ
/// floored at [`SIGMA_FLOOR`].
pub fn nll_metric(y: &Tensor, mu: &Tensor, sigma: &Tensor) -> Result<f64> {
    check_pair(y, mu)?;
    let s = floored(sigma, y)?;
    let total: f64 = y
        .data()
        .iter()
        .zip(mu.data())
        .zip(&s)
        .map(|((t, m), s)| {
            let var = s * s;
            var.ln() + (t - m) * (t - m) / var
        })
        .sum();
    Ok(total / y.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityCurve {
    pub levels: Vec<f64>,
    pub coverage: Vec<f64>,
}

/// Observed coverage of the central `p` intervals `μ ± z·σ`.
pub fn reliability_curve(
    y: &Tensor,
    mu: &Tensor,
    sigma: &Tensor,
    levels: &[f64],
) -> Result<ReliabilityCurve> {
    check_pair(y, mu)?;
    if levels.is_empty() {
        return Err(Error::invalid("no calibration levels"));
    }
    if levels.iter().any(|p| !(*p > 0.0 && *p < 1.0)) || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "levels must be strictly increasing inside (0, 1)",
        ));
    }
    let s = floored(sigma, y)?;
    let normal = Normal::standard();
    let n = y.len() as f64;
    let coverage = levels
        .iter()
        .map(|&p| {
            let z = normal.inverse_cdf(0.5 * (1.0 + p));
            let hit = y
                .data()
                .iter()
                .zip(mu.data())
                .zip(&s)
                .filter(|((t, m), s)| (*t - *m).abs() <= z * **s)
                .count();
            hit as f64 / n
        })
        .collect();
    Ok(ReliabilityCurve {
        levels: levels.to_vec(),
        coverage,
    })
}

/// Mean absolute deviation between observed coverage and nominal level.
pub fn ece(curve: &ReliabilityCurve) -> f64 {
    let total: f64 = curve
        .levels
        .iter()
        .zip(&curve.coverage)
        .map(|(p, c)| (c - p).abs())
        .sum();
    total / curve.levels.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceErrorCurve {
    /// Thresholds min-max normalized to [0, 1].
    pub x: Vec<f64>,
    pub sigma_t: Vec<f64>,
    pub mae: Vec<f64>,
    pub retained: Vec<usize>,
}

/// Mean absolute error of the predictions whose σ is at least each of
/// `steps` evenly spaced thresholds between min σ and max σ.
pub fn error_vs_confidence(
    y: &Tensor,
    mu: &Tensor,
    sigma: &Tensor,
    steps: usize,
) -> Result<ConfidenceErrorCurve> {
    check_pair(y, mu)?;
    if steps < 2 {
        return Err(Error::invalid(format!(
            "at least 2 thresholds required, got {steps}"
        )));
    }
    if sigma.shape() != y.shape() || !sigma.is_finite() {
        return Err(Error::invalid("σ must be finite and match the targets"));
    }
    let err: Vec<f64> = y
        .data()
        .iter()
        .zip(mu.data())
        .map(|(t, m)| (t - m).abs())
        .collect();
    let s = sigma.data();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overall = err.iter().sum::<f64>() / err.len() as f64;
    if hi <= lo {
        return Ok(ConfidenceErrorCurve {
            x: vec![0.0],
            sigma_t: vec![lo],
            mae: vec![overall],
            retained: vec![err.len()],
        });
    }
    let mut curve = ConfidenceErrorCurve {
        x: Vec::new(),
        sigma_t: Vec::new(),
        mae: Vec::new(),
        retained: Vec::new(),
    };
    for k in 0..steps {
        let frac = k as f64 / (steps - 1) as f64;
        let t = if k == steps - 1 {
            hi
        } else {
            lo + frac * (hi - lo)
        };
        let (sum, count) = err
            .iter()
            .zip(s)
            .filter(|(_, s)| **s >= t)
            .fold((0.0, 0usize), |(a, c), (e, _)| (a + e, c + 1));
        if count == 0 {
            break;
        }
        curve.x.push(frac);
        curve.sigma_t.push(t);
        curve.mae.push(sum / count as f64);
        curve.retained.push(count);
    }
    Ok(curve)
}

/// The five summary scores of one model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub mape: f64,
    pub mse: f64,
    pub r2: f64,
    pub ece: f64,
    pub nll: f64,
}

/// Scores standardized predictions. MAPE is taken in original units using
/// `scale`; every other metric stays on the standardized scale.
pub fn bundle(y: &Tensor, mu: &Tensor, sigma: &Tensor, scale: TargetScale) -> Result<MetricBundle> {
    let y_orig = y.map(|v| scale.descale(v));
    let mu_orig = mu.map(|v| scale.descale(v));
    Ok(MetricBundle {
        mape: mape(&y_orig, &mu_orig)?,
        mse: mse(y, mu)?,
        r2: r2(y, mu)?,
        ece: ece(&reliability_curve(y, mu, sigma, &default_levels())?),
        nll: nll_metric(y, mu, sigma)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Tensor {
        Tensor::vector(xs.to_vec())
    }

    #[test]
    fn mape_examples() {
        assert!((mape(&v(&[100.0, 200.0]), &v(&[90.0, 220.0])).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(mape(&v(&[3.0, -2.0]), &v(&[3.0, -2.0])).unwrap(), 0.0);
        assert!((mape(&v(&[0.0, 2.0]), &v(&[5.0, 1.0])).unwrap() - 50.0).abs() < 1e-12);
        assert!(matches!(
            mape(&v(&[0.0]), &v(&[1.0])),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn mse_and_r2_examples() {
        assert_eq!(mse(&v(&[1.0, -1.0]), &v(&[0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(r2(&v(&[0.0, 1.0]), &v(&[1.0, 0.0])).unwrap(), -3.0);
        assert_eq!(r2(&v(&[0.0, 1.0, 2.0]), &v(&[1.0, 1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(r2(&v(&[0.5, 1.5]), &v(&[0.5, 1.5])).unwrap(), 1.0);
        assert!(matches!(
            r2(&v(&[2.0, 2.0]), &v(&[1.0, 2.0])),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(mse(&v(&[1.0]), &v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn nll_examples() {
        assert_eq!(
            nll_metric(&v(&[1.0, 2.0]), &v(&[1.0, 2.0]), &v(&[1.0, 1.0])).unwrap(),
            0.0
        );
        let got = nll_metric(&v(&[2.0]), &v(&[0.0]), &v(&[2.0])).unwrap();
        assert!((got - (4f64.ln() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn ece_extremes() {
        let levels = default_levels();
        let zero = ReliabilityCurve {
            levels: levels.clone(),
            coverage: vec![0.0; 9],
        };
        let one = ReliabilityCurve {
            levels,
            coverage: vec![1.0; 9],
        };
        assert!((ece(&zero) - 0.5).abs() < 1e-12);
        assert!((ece(&one) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coverage_extremes() {
        let y = v(&[1.0, -1.0, 0.5]);
        let mu = v(&[0.0, 0.0, 0.0]);
        let wide = reliability_curve(&y, &mu, &v(&[1e9; 3]), &default_levels()).unwrap();
        assert!(wide.coverage.iter().all(|&c| c == 1.0));
        let narrow = reliability_curve(&y, &mu, &v(&[0.0; 3]), &default_levels()).unwrap();
        assert!(narrow.coverage.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn constant_sigma_gives_single_point() {
        let c = error_vs_confidence(&v(&[1.0, 2.0]), &v(&[0.0, 0.0]), &v(&[0.3, 0.3]), 20).unwrap();
        assert_eq!(c.x, vec![0.0]);
        assert_eq!(c.mae, vec![1.5]);
    }

    #[test]
    fn conf_curve_starts_at_overall_mae() {
        let y = v(&[1.0, 2.0, 3.0, 4.0]);
        let mu = v(&[0.0, 0.0, 0.0, 0.0]);
        let c = error_vs_confidence(&y, &mu, &v(&[0.1, 0.2, 0.3, 0.4]), 5).unwrap();
        assert_eq!(c.mae[0], 2.5);
        assert_eq!(c.x.first(), Some(&0.0));
        assert_eq!(c.x.last(), Some(&1.0));
        assert!(c.retained.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*c.retained.last().unwrap(), 1);
    }
}
