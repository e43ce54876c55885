//! Predictive distributions from stochastic forward passes, deep ensembles
//! and the aleatoric Gaussian head.

mod dump;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndcore::{RngStream, Tensor};
use crate::neural::{GaussianHeadOutput, Model, UqMethod};

pub use dump::{read_predictions, write_predictions, PredictionRow};

/// Per-output Gaussian summary of a model's predictions, `n × H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDistribution {
    pub mean: Tensor,
    pub std: Tensor,
    pub samples: usize,
    pub method: UqMethod,
}

impl PredictiveDistribution {
    pub fn len(&self) -> usize {
        self.mean.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn horizon(&self) -> usize {
        self.mean.cols()
    }

    /// Multiplies every standard deviation by `k` (used for calibration probes).
    pub fn with_scaled_std(&self, k: f64) -> Self {
        Self {
            std: self.std.scale(k),
            ..self.clone()
        }
    }
}

/// Running per-element mean and sum of squared deviations.
struct Welford {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(xs) {
            let d = x - *m;
            *m += d / k;
            *s += d * (x - *m);
        }
    }

    /// Mean and sample standard deviation (denominator `count − 1`).
    fn finish(self, shape: &[usize]) -> Result<(Tensor, Tensor)> {
        let denom = (self.count - 1) as f64;
        let std = self
            .m2
            .iter()
            .map(|s| (s.max(0.0) / denom).sqrt())
            .collect();
        Ok((
            Tensor::new(shape.to_vec(), self.mean)?,
            Tensor::new(shape.to_vec(), std)?,
        ))
    }
}

/// Monte Carlo predictive distribution from `m` stochastic passes.
///
/// Pass `k` draws its noise from `rng.split_index(k)`, so the result depends
/// only on the stream and not on evaluation order.
pub fn mc_predict(
    model: &Model,
    x: &Tensor,
    m: usize,
    rng: &RngStream,
) -> Result<PredictiveDistribution> {
    if !model.is_stochastic() {
        return Err(Error::WrongMethod(format!(
            "Monte Carlo prediction needs a stochastic model, got {}",
            model.config().method
        )));
    }
    if m < 2 {
        return Err(Error::invalid(format!(
            "at least 2 forward passes required, got {m}"
        )));
    }
    let mut acc: Option<(Welford, Vec<usize>)> = None;
    for k in 0..m {
        let out = model.forward_stochastic(x, &mut rng.split_index(k as u64))?;
        let (w, _) = acc.get_or_insert_with(|| (Welford::new(out.len()), out.shape().to_vec()));
        w.push(out.data());
    }
    let (w, shape) = acc.expect("m >= 2");
    let (mean, std) = w.finish(&shape)?;
    Ok(PredictiveDistribution {
        mean,
        std,
        samples: m,
        method: model.config().method,
    })
}

/// Mean and sample spread of the members' deterministic predictions.
pub fn ensemble_predict(members: &[Model], x: &Tensor) -> Result<PredictiveDistribution> {
    if members.len() < 2 {
        return Err(Error::invalid(format!(
            "an ensemble needs at least 2 members, got {}",
            members.len()
        )));
    }
    let sig = members[0].config().shape_signature();
    if let Some(k) = members
        .iter()
        .position(|m| m.config().shape_signature() != sig)
    {
        return Err(Error::invalid(format!(
            "ensemble member {k} differs in shape from member 0"
        )));
    }
    let mut acc: Option<(Welford, Vec<usize>)> = None;
    for member in members {
        let out = member.forward_deterministic(x)?;
        let (w, _) = acc.get_or_insert_with(|| (Welford::new(out.len()), out.shape().to_vec()));
        w.push(out.data());
    }
    let (w, shape) = acc.expect("non-empty");
    let (mean, std) = w.finish(&shape)?;
    Ok(PredictiveDistribution {
        mean,
        std,
        samples: members.len(),
        method: UqMethod::Ensemble,
    })
}

/// One deterministic pass through the Gaussian head: σ = exp(log σ² / 2).
pub fn baseline_predict(model: &Model, x: &Tensor) -> Result<PredictiveDistribution> {
    if model.config().method != UqMethod::Baseline {
        return Err(Error::WrongMethod(format!(
            "only Baseline models carry a Gaussian head, got {}",
            model.config().method
        )));
    }
    let raw = model.forward_deterministic(x)?;
    let head = GaussianHeadOutput::from_raw(&raw, model.config().horizon)?;
    Ok(PredictiveDistribution {
        std: head.log_var.map(|lv| (0.5 * lv).exp()),
        mean: head.mu,
        samples: 1,
        method: UqMethod::Baseline,
    })
}

/// Moment-matched Gaussian for an equally weighted mixture.
///
/// `means` and `vars` are `M × n × H`; returns `n × H` mean and std with
/// population moments.
pub fn combine_mixture(means: &Tensor, vars: &Tensor) -> Result<(Tensor, Tensor)> {
    if means.shape() != vars.shape() || means.rank() != 3 {
        return Err(Error::invalid(format!(
            "mixture components must be matching M×n×H tensors, got {:?} and {:?}",
            means.shape(),
            vars.shape()
        )));
    }
    if let Some(v) = vars.data().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::invalid(format!(
            "mixture variance must be non-negative, got {v}"
        )));
    }
    let m = means.shape()[0];
    if m == 0 {
        return Err(Error::invalid("mixture has no components"));
    }
    let out_shape = means.shape()[1..].to_vec();
    let len: usize = out_shape.iter().product();
    let mut first = vec![0.0; len];
    let mut second = vec![0.0; len];
    for (chunk_mu, chunk_var) in means.data().chunks(len).zip(vars.data().chunks(len)) {
        for j in 0..len {
            first[j] += chunk_mu[j];
            second[j] += chunk_var[j] + chunk_mu[j] * chunk_mu[j];
        }
    }
    let k = m as f64;
    let mean: Vec<f64> = first.iter().map(|s| s / k).collect();
    let std = second
        .iter()
        .zip(&mean)
        .map(|(s, mu)| (s / k - mu * mu).max(0.0).sqrt())
        .collect();
    Ok((
        Tensor::new(out_shape.clone(), mean)?,
        Tensor::new(out_shape, std)?,
    ))
}
