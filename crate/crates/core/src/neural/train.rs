use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::loss::{gaussian_nll_with_grad, mse_with_grad, LOG_VAR_MAX, LOG_VAR_MIN};
use super::model::{GaussianHeadOutput, Model, ModelNoise, UqMethod};
use crate::dataio::WindowSet;
use crate::error::{Error, Result};
use crate::ndcore::{RngStream, Tensor};

pub const LEARNING_RATE: f64 = 0.001;
pub const EPOCHS: usize = 100;
pub const BATCH_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    #[serde(rename = "nll")]
    GaussianNll,
}

impl LossKind {
    /// The Gaussian head is trained on NLL, every other model on MSE.
    pub fn for_method(method: UqMethod) -> Self {
        if method == UqMethod::Baseline {
            LossKind::GaussianNll
        } else {
            LossKind::Mse
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: LossKind,
    /// Weight of the KL term for variational models; `None` means one over
    /// the number of minibatches per epoch.
    pub kl_weight: Option<f64>,
}

impl TrainConfig {
    pub fn for_method(method: UqMethod) -> Self {
        Self {
            learning_rate: LEARNING_RATE,
            epochs: EPOCHS,
            batch_size: BATCH_SIZE,
            loss: LossKind::for_method(method),
            kl_weight: None,
        }
    }

    pub fn validate(&self, method: UqMethod) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.loss != LossKind::for_method(method) {
            return Err(Error::Config(format!(
                "{method} models train with {:?}, not {:?}",
                LossKind::for_method(method),
                self.loss
            )));
        }
        if let Some(w) = self.kl_weight {
            if !(w >= 0.0) {
                return Err(Error::Config(format!(
                    "KL weight must be non-negative, got {w}"
                )));
            }
        }
        Ok(())
    }
}

/// Data loss (plus weighted KL for variational models) for one batch under
/// a fixed noise realization, with gradients aligned to [`Model::params`].
pub fn objective(
    model: &Model,
    x: &Tensor,
    y: &Tensor,
    noise: &ModelNoise,
    loss: LossKind,
    kl_weight: f64,
) -> Result<(f64, Vec<Tensor>)> {
    let (raw, tape) = model.forward_tape(x, noise)?;
    let (mut value, grad_out) = match loss {
        LossKind::Mse => mse_with_grad(&raw, y)?,
        LossKind::GaussianNll => {
            let horizon = model.config().horizon;
            let head = GaussianHeadOutput::from_raw(&raw, horizon)?;
            let (v, g_mu, g_lv) = gaussian_nll_with_grad(&head.mu, &head.log_var, y)?;
            // the clamp passes gradient only inside its range
            let raw_lv = raw.column_range(horizon, 2 * horizon)?;
            let g_lv = raw_lv.zip_map(&g_lv, |r, g| {
                if (LOG_VAR_MIN..=LOG_VAR_MAX).contains(&r) {
                    g
                } else {
                    0.0
                }
            })?;
            (v, g_mu.hcat(&g_lv)?)
        }
    };
    let mut grads = model.backward(&tape, noise, &grad_out)?;
    if model.config().method.is_variational() && kl_weight > 0.0 {
        let (kl, kl_grads) = model.kl_with_grad()?;
        value += kl_weight * kl;
        for (g, k) in grads.iter_mut().zip(&kl_grads) {
            g.axpy(kl_weight, k)?;
        }
    }
    Ok((value, grads))
}

/// Minibatch Adam training. Batches are reshuffled every epoch and
/// stochastic layers draw fresh noise for every batch. Returns the model and
/// the mean training loss of each epoch.
pub fn train(
    mut model: Model,
    windows: &WindowSet,
    tcfg: &TrainConfig,
    rng: &mut RngStream,
) -> Result<(Model, Vec<f64>)> {
    let method = model.config().method;
    tcfg.validate(method)?;
    if windows.is_empty() {
        return Err(Error::invalid("no training windows"));
    }
    if windows.horizon != model.config().horizon || windows.features() != model.config().features {
        return Err(Error::invalid(format!(
            "windows (H={}, F={}) do not fit the model (H={}, F={})",
            windows.horizon,
            windows.features(),
            model.config().horizon,
            model.config().features
        )));
    }
    let n = windows.len();
    let batches = n.div_ceil(tcfg.batch_size);
    let kl_weight = tcfg.kl_weight.unwrap_or(1.0 / batches as f64);
    let mut adam = AdamState::new(&model.params());
    let mut history = Vec::with_capacity(tcfg.epochs);

    for epoch in 1..=tcfg.epochs {
        let order = rng.permutation(n);
        let mut total = 0.0;
        for idx in order.chunks(tcfg.batch_size) {
            let x = windows.x.gather_rows(idx)?;
            let y = windows.y.gather_rows(idx)?;
            let noise = model.sample_noise(idx.len(), rng)?;
            let (loss, grads) = objective(&model, &x, &y, &noise, tcfg.loss, kl_weight)?;
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::TrainingDiverged { epoch, loss });
            }
            total += loss;
            adam.step(&mut model.params_mut(), &grads, tcfg.learning_rate)?;
        }
        history.push(total / batches as f64);
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{make_windows, FrameTable};
    use crate::neural::model::{build_model, Architecture, ModelConfig};

    fn linear_windows(n: usize) -> WindowSet {
        let t = n + 12;
        let values: Vec<f64> = (0..t).map(|k| -1.0 + 2.0 * k as f64 / t as f64).collect();
        let frame = FrameTable::new(
            (0..t as i64).collect(),
            Tensor::new(vec![t, 1], values).unwrap(),
            vec!["v".into()],
            0,
        )
        .unwrap();
        make_windows(&frame, 12, 1).unwrap()
    }

    #[test]
    fn epochs_zero_rejected() {
        let cfg = ModelConfig::new(Architecture::Mlp, UqMethod::Baseline, 1, 1);
        let model = build_model(&cfg, &mut RngStream::new(0)).unwrap();
        let mut tcfg = TrainConfig::for_method(UqMethod::Baseline);
        tcfg.epochs = 0;
        let err = train(model, &linear_windows(8), &tcfg, &mut RngStream::new(0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn wrong_loss_rejected() {
        let mut tcfg = TrainConfig::for_method(UqMethod::Dropout);
        tcfg.loss = LossKind::GaussianNll;
        assert!(tcfg.validate(UqMethod::Dropout).is_err());
    }

    #[test]
    fn history_is_reproducible() {
        let cfg = ModelConfig::new(Architecture::Mlp, UqMethod::Dropout, 1, 1);
        let w = linear_windows(64);
        let mut tcfg = TrainConfig::for_method(UqMethod::Dropout);
        tcfg.epochs = 5;
        let run = || {
            let model = build_model(&cfg, &mut RngStream::new(3)).unwrap();
            train(model, &w, &tcfg, &mut RngStream::new(3)).unwrap()
        };
        let (m1, h1) = run();
        let (m2, h2) = run();
        assert_eq!(
            h1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            h2.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(m1, m2);
    }

    #[test]
    fn divergence_reports_epoch() {
        let cfg = ModelConfig::new(Architecture::Mlp, UqMethod::Ensemble, 1, 1);
        let model = build_model(&cfg, &mut RngStream::new(0)).unwrap();
        let mut w = linear_windows(16);
        w.y = w.y.map(|_| 1e300);
        let mut tcfg = TrainConfig::for_method(UqMethod::Ensemble);
        tcfg.epochs = 3;
        match train(model, &w, &tcfg, &mut RngStream::new(0)) {
            Err(Error::TrainingDiverged { epoch, .. }) => assert_eq!(epoch, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
