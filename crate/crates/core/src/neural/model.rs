use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::layers::{Activation, DenseCache, DenseKind, DenseNoise, UqDense};
use super::loss::{kl_gaussian_with_grad, LOG_VAR_MAX, LOG_VAR_MIN};
use super::lstm::{lstm_sequence, lstm_sequence_backward, LstmTape};
use super::params::LstmParams;
use crate::error::{Error, Result};
use crate::ndcore::{sample_bernoulli_mask, RngStream, Tensor};

pub const DEFAULT_PAST: usize = 12;
pub const MAX_HORIZON: usize = 12;
pub const DEFAULT_HIDDEN_UNITS: usize = 32;
pub const DEFAULT_HIDDEN_LAYERS: usize = 2;
pub const DROPOUT_P: f64 = 0.2;
pub const DROPCONNECT_P: f64 = 0.05;
pub const MC_SAMPLES: usize = 50;
pub const ENSEMBLE_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Mlp,
    Lstm,
}

impl Architecture {
    pub const ALL: [Architecture; 2] = [Architecture::Mlp, Architecture::Lstm];

    pub fn key(self) -> &'static str {
        match self {
            Architecture::Mlp => "mlp",
            Architecture::Lstm => "lstm",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Mlp => "MLP",
            Architecture::Lstm => "LSTM",
        })
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mlp" => Ok(Architecture::Mlp),
            "lstm" => Ok(Architecture::Lstm),
            _ => Err(Error::Config(format!("unknown architecture `{s}`"))),
        }
    }
}

/// Uncertainty method, in the row order used by ranking tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UqMethod {
    Baseline,
    Ensemble,
    Dropout,
    #[serde(rename = "dropconnect")]
    DropConnect,
    Bbb,
    Flipout,
}

impl UqMethod {
    pub const ALL: [UqMethod; 6] = [
        UqMethod::Baseline,
        UqMethod::Ensemble,
        UqMethod::Dropout,
        UqMethod::DropConnect,
        UqMethod::Bbb,
        UqMethod::Flipout,
    ];

    pub fn key(self) -> &'static str {
        match self {
            UqMethod::Baseline => "baseline",
            UqMethod::Ensemble => "ensemble",
            UqMethod::Dropout => "dropout",
            UqMethod::DropConnect => "dropconnect",
            UqMethod::Bbb => "bbb",
            UqMethod::Flipout => "flipout",
        }
    }

    /// Methods whose predictive spread comes from repeated stochastic passes.
    pub fn is_monte_carlo(self) -> bool {
        matches!(
            self,
            UqMethod::Dropout | UqMethod::DropConnect | UqMethod::Bbb | UqMethod::Flipout
        )
    }

    pub fn is_variational(self) -> bool {
        matches!(self, UqMethod::Bbb | UqMethod::Flipout)
    }

    pub fn default_drop_prob(self) -> f64 {
        match self {
            UqMethod::Dropout => DROPOUT_P,
            UqMethod::DropConnect => DROPCONNECT_P,
            _ => 0.0,
        }
    }
}

impl fmt::Display for UqMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UqMethod::Baseline => "Baseline",
            UqMethod::Ensemble => "Ensemble",
            UqMethod::Dropout => "Dropout",
            UqMethod::DropConnect => "Dropconnect",
            UqMethod::Bbb => "BBB",
            UqMethod::Flipout => "Flipout",
        })
    }
}

impl FromStr for UqMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        UqMethod::ALL
            .into_iter()
            .find(|m| m.key() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown uncertainty method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub method: UqMethod,
    pub hidden_units: usize,
    pub hidden_layers: usize,
    /// Input window length.
    pub past: usize,
    pub features: usize,
    pub horizon: usize,
    pub drop_prob: f64,
    pub mc_samples: usize,
    pub ensemble_size: usize,
    pub prior_std: f64,
}

impl ModelConfig {
    pub fn new(
        architecture: Architecture,
        method: UqMethod,
        features: usize,
        horizon: usize,
    ) -> Self {
        Self {
            architecture,
            method,
            hidden_units: DEFAULT_HIDDEN_UNITS,
            hidden_layers: DEFAULT_HIDDEN_LAYERS,
            past: DEFAULT_PAST,
            features,
            horizon,
            drop_prob: method.default_drop_prob(),
            mc_samples: MC_SAMPLES,
            ensemble_size: ENSEMBLE_SIZE,
            prior_std: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(1..=MAX_HORIZON).contains(&self.horizon) {
            return fail(format!(
                "horizon must lie in 1..={MAX_HORIZON}, got {}",
                self.horizon
            ));
        }
        if self.past == 0 || self.features == 0 || self.hidden_units == 0 {
            return fail("window length, feature count and hidden units must be positive".into());
        }
        if self.architecture == Architecture::Lstm && self.hidden_layers == 0 {
            return fail("an LSTM model needs at least one recurrent layer".into());
        }
        if !(0.0..1.0).contains(&self.drop_prob) {
            return fail(format!(
                "drop probability must lie in [0, 1), got {}",
                self.drop_prob
            ));
        }
        if self.method.is_monte_carlo() && self.mc_samples < 2 {
            return fail(format!(
                "Monte Carlo prediction needs at least 2 passes, got {}",
                self.mc_samples
            ));
        }
        if self.method == UqMethod::Ensemble && self.ensemble_size < 2 {
            return fail(format!(
                "an ensemble needs at least 2 members, got {}",
                self.ensemble_size
            ));
        }
        if !(self.prior_std > 0.0) {
            return fail(format!(
                "prior std must be positive, got {}",
                self.prior_std
            ));
        }
        Ok(())
    }

    /// Width of the network output: `(μ, log σ²)` pairs for the Gaussian
    /// head, means only otherwise.
    pub fn output_width(&self) -> usize {
        if self.method == UqMethod::Baseline {
            2 * self.horizon
        } else {
            self.horizon
        }
    }

    fn hidden_kind(&self) -> DenseKind {
        match self.method {
            UqMethod::Baseline | UqMethod::Ensemble => DenseKind::Plain,
            UqMethod::Dropout => DenseKind::Dropout(self.drop_prob),
            UqMethod::DropConnect => DenseKind::DropConnect(self.drop_prob),
            UqMethod::Bbb => DenseKind::Bbb,
            UqMethod::Flipout => DenseKind::Flipout,
        }
    }

    fn head_kind(&self) -> DenseKind {
        match self.method {
            // dropout acts on the activations feeding the head, not on the predictions
            UqMethod::Dropout => DenseKind::Plain,
            _ => self.hidden_kind(),
        }
    }

    /// Identity used to decide whether two models can be aggregated.
    pub fn shape_signature(&self) -> (Architecture, usize, usize, usize, usize, usize, usize) {
        (
            self.architecture,
            self.hidden_units,
            self.hidden_layers,
            self.past,
            self.features,
            self.horizon,
            self.output_width(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Body {
    Mlp { layers: Vec<UqDense> },
    Lstm { layers: Vec<LstmParams> },
}

/// Noise realization for a full forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelNoise {
    hidden: Vec<DenseNoise>,
    final_mask: Option<Tensor>,
    head: DenseNoise,
}

#[derive(Debug, Clone)]
enum BodyTape {
    Mlp(Vec<DenseCache>),
    Lstm(Vec<LstmTape>),
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    body: BodyTape,
    head: DenseCache,
}

/// Split Gaussian head output: means and clamped log-variances.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHeadOutput {
    pub mu: Tensor,
    pub log_var: Tensor,
}

impl GaussianHeadOutput {
    /// Splits a `batch × 2H` raw output into `(μ, clamp(log σ²))`.
    pub fn from_raw(raw: &Tensor, horizon: usize) -> Result<Self> {
        if raw.rank() != 2 || raw.cols() != 2 * horizon {
            return Err(Error::invalid(format!(
                "Gaussian head output must be batch×{}, got {:?}",
                2 * horizon,
                raw.shape()
            )));
        }
        Ok(Self {
            mu: raw.column_range(0, horizon)?,
            log_var: raw
                .column_range(horizon, 2 * horizon)?
                .map(|v| v.clamp(LOG_VAR_MIN, LOG_VAR_MAX)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    config: ModelConfig,
    body: Body,
    head: UqDense,
}

/// Builds a freshly initialized network for `config`.
///
/// MLP: flattened window → `hidden_layers` uncertainty-dense layers (ReLU) →
/// output head. LSTM: stacked LSTM layers (the last one keeps only its final
/// state) → output head; for dropout models the final state is masked.
pub fn build_model(config: &ModelConfig, rng: &mut RngStream) -> Result<Model> {
    config.validate()?;
    let units = config.hidden_units;
    let (body, head_in) = match config.architecture {
        Architecture::Mlp => {
            let mut layers = Vec::with_capacity(config.hidden_layers);
            let mut fan_in = config.past * config.features;
            for _ in 0..config.hidden_layers {
                layers.push(UqDense::init(
                    config.hidden_kind(),
                    fan_in,
                    units,
                    Activation::Relu,
                    rng,
                )?);
                fan_in = units;
            }
            (Body::Mlp { layers }, fan_in)
        }
        Architecture::Lstm => {
            let mut layers = Vec::with_capacity(config.hidden_layers);
            let mut fan_in = config.features;
            for _ in 0..config.hidden_layers {
                layers.push(LstmParams::init(fan_in, units, rng));
                fan_in = units;
            }
            (Body::Lstm { layers }, units)
        }
    };
    let head = UqDense::init(
        config.head_kind(),
        head_in,
        config.output_width(),
        Activation::Identity,
        rng,
    )?;
    Ok(Model {
        config: config.clone(),
        body,
        head,
    })
}

impl Model {
    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn is_stochastic(&self) -> bool {
        self.config.method.is_monte_carlo()
    }

    /// Number of recurrent layers (zero for an MLP).
    pub fn lstm_layer_count(&self) -> usize {
        match &self.body {
            Body::Lstm { layers } => layers.len(),
            Body::Mlp { .. } => 0,
        }
    }

    pub fn dense_layer_count(&self) -> usize {
        match &self.body {
            Body::Mlp { layers } => layers.len() + 1,
            Body::Lstm { .. } => 1,
        }
    }

    pub fn head(&self) -> &UqDense {
        &self.head
    }

    pub fn params(&self) -> Vec<&Tensor> {
        let mut out: Vec<&Tensor> = match &self.body {
            Body::Mlp { layers } => layers.iter().flat_map(UqDense::tensors).collect(),
            Body::Lstm { layers } => layers.iter().flat_map(|l| l.tensors()).collect(),
        };
        out.extend(self.head.tensors());
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = match &mut self.body {
            Body::Mlp { layers } => layers.iter_mut().flat_map(UqDense::tensors_mut).collect(),
            Body::Lstm { layers } => layers.iter_mut().flat_map(|l| l.tensors_mut()).collect(),
        };
        out.extend(self.head.tensors_mut());
        out
    }

    pub fn param_names(&self) -> Vec<String> {
        const LSTM_NAMES: [&str; 12] = [
            "w_i", "w_f", "w_o", "w_g", "u_i", "u_f", "u_o", "u_g", "b_i", "b_f", "b_o", "b_g",
        ];
        let mut out = Vec::new();
        match &self.body {
            Body::Mlp { layers } => {
                for (k, l) in layers.iter().enumerate() {
                    out.extend(l.tensor_names().iter().map(|n| format!("dense{k}.{n}")));
                }
            }
            Body::Lstm { layers } => {
                for k in 0..layers.len() {
                    out.extend(LSTM_NAMES.iter().map(|n| format!("lstm{k}.{n}")));
                }
            }
        }
        out.extend(self.head.tensor_names().iter().map(|n| format!("head.{n}")));
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|t| t.len()).sum()
    }

    /// A noise realization with every stochastic element switched off.
    pub fn deterministic_noise(&self) -> ModelNoise {
        let hidden = match &self.body {
            Body::Mlp { layers } => vec![DenseNoise::None; layers.len()],
            Body::Lstm { .. } => Vec::new(),
        };
        ModelNoise {
            hidden,
            final_mask: None,
            head: DenseNoise::None,
        }
    }

    /// Draws fresh masks, weight noise and sign vectors for a batch.
    pub fn sample_noise(&self, batch: usize, rng: &mut RngStream) -> Result<ModelNoise> {
        if !self.is_stochastic() {
            return Ok(self.deterministic_noise());
        }
        let mut noise = self.deterministic_noise();
        match &self.body {
            Body::Mlp { layers } => {
                for (slot, layer) in noise.hidden.iter_mut().zip(layers) {
                    *slot = layer.sample_noise(batch, rng, true)?;
                }
            }
            Body::Lstm { .. } => {
                if self.config.method == UqMethod::Dropout {
                    let p = self.config.drop_prob;
                    let mask =
                        sample_bernoulli_mask(&[batch, self.config.hidden_units], 1.0 - p, rng)?;
                    noise.final_mask = Some(mask.scale(1.0 / (1.0 - p)));
                }
            }
        }
        noise.head = self.head.sample_noise(batch, rng, true)?;
        Ok(noise)
    }

    fn check_input(&self, x: &Tensor) -> Result<usize> {
        let c = &self.config;
        match x.shape() {
            &[n, past, f] if past == c.past && f == c.features => Ok(n),
            s => Err(Error::invalid(format!(
                "model expects batch×{}×{} input, got {s:?}",
                c.past, c.features
            ))),
        }
    }

    pub fn forward(&self, x: &Tensor, noise: &ModelNoise) -> Result<Tensor> {
        Ok(self.forward_tape(x, noise)?.0)
    }

    pub fn forward_deterministic(&self, x: &Tensor) -> Result<Tensor> {
        self.forward(x, &self.deterministic_noise())
    }

    /// One pass with freshly sampled noise.
    pub fn forward_stochastic(&self, x: &Tensor, rng: &mut RngStream) -> Result<Tensor> {
        let noise = self.sample_noise(x.shape().first().copied().unwrap_or(0), rng)?;
        self.forward(x, &noise)
    }

    pub fn forward_tape(&self, x: &Tensor, noise: &ModelNoise) -> Result<(Tensor, Tape)> {
        let batch = self.check_input(x)?;
        let c = &self.config;
        let (last, body_tape) = match &self.body {
            Body::Mlp { layers } => {
                if noise.hidden.len() != layers.len() {
                    return Err(Error::invalid("noise does not match model depth"));
                }
                let mut h = x.clone().reshape(&[batch, c.past * c.features])?;
                let mut caches = Vec::with_capacity(layers.len());
                for (layer, n) in layers.iter().zip(&noise.hidden) {
                    let (out, cache) = layer.forward_cached(&h, n)?;
                    h = out;
                    caches.push(cache);
                }
                (h, BodyTape::Mlp(caches))
            }
            Body::Lstm { layers } => {
                let mut seq = time_slices(x)?;
                let mut tapes = Vec::with_capacity(layers.len());
                for p in layers {
                    let (hs, tape) = lstm_sequence(&seq, p)?;
                    seq = hs;
                    tapes.push(tape);
                }
                let mut last = seq
                    .pop()
                    .ok_or_else(|| Error::invalid("empty input window"))?;
                if let Some(mask) = &noise.final_mask {
                    last = last.mul(mask)?;
                }
                (last, BodyTape::Lstm(tapes))
            }
        };
        let (out, head) = self.head.forward_cached(&last, &noise.head)?;
        Ok((
            out,
            Tape {
                body: body_tape,
                head,
            },
        ))
    }

    /// Parameter gradients, aligned with [`Model::params`], for an upstream
    /// gradient on the network output.
    pub fn backward(
        &self,
        tape: &Tape,
        noise: &ModelNoise,
        grad_out: &Tensor,
    ) -> Result<Vec<Tensor>> {
        let (mut g, head_grads) = self.head.backward(&tape.head, &noise.head, grad_out)?;
        let mut body_grads: Vec<Vec<Tensor>> = Vec::new();
        match (&self.body, &tape.body) {
            (Body::Mlp { layers }, BodyTape::Mlp(caches)) => {
                for ((layer, cache), n) in layers.iter().zip(caches).zip(&noise.hidden).rev() {
                    let (gx, pg) = layer.backward(cache, n, &g)?;
                    g = gx;
                    body_grads.push(pg);
                }
            }
            (Body::Lstm { layers }, BodyTape::Lstm(tapes)) => {
                if let Some(mask) = &noise.final_mask {
                    g = g.mul(mask)?;
                }
                let steps = self.config.past;
                let mut grad_h: Vec<Option<Tensor>> = vec![None; steps];
                grad_h[steps - 1] = Some(g);
                for (p, t) in layers.iter().zip(tapes).rev() {
                    let (gx, pg) = lstm_sequence_backward(t, p, &grad_h)?;
                    grad_h = gx.into_iter().map(Some).collect();
                    body_grads.push(pg);
                }
            }
            _ => return Err(Error::invalid("tape does not belong to this model")),
        }
        let mut out: Vec<Tensor> = body_grads.into_iter().rev().flatten().collect();
        out.extend(head_grads);
        Ok(out)
    }

    /// Summed KL divergence of every variational layer against the prior,
    /// with gradients aligned to [`Model::params`] (zeros for other tensors).
    pub fn kl_with_grad(&self) -> Result<(f64, Vec<Tensor>)> {
        let prior = self.config.prior_std;
        let mut total = 0.0;
        let mut grads = Vec::new();
        fn visit(
            layer: &UqDense,
            prior: f64,
            total: &mut f64,
            grads: &mut Vec<Tensor>,
        ) -> Result<()> {
            match layer.variational() {
                Some(p) => {
                    let (kl, g) = kl_gaussian_with_grad(p, prior)?;
                    *total += kl;
                    grads.extend(g);
                }
                None => grads.extend(layer.tensors().iter().map(|t| Tensor::zeros(t.shape()))),
            }
            Ok(())
        }
        match &self.body {
            Body::Mlp { layers } => {
                for l in layers {
                    visit(l, prior, &mut total, &mut grads)?;
                }
            }
            Body::Lstm { layers } => {
                for l in layers {
                    grads.extend(l.tensors().iter().map(|t| Tensor::zeros(t.shape())));
                }
            }
        }
        visit(&self.head, prior, &mut total, &mut grads)?;
        Ok((total, grads))
    }

    /// Checks that every tensor matches the shapes `build_model` would create.
    pub fn validate(&self) -> Result<()> {
        let fresh = build_model(&self.config, &mut RngStream::new(0))?;
        let ours: Vec<&[usize]> = self.params().iter().map(|t| t.shape()).collect();
        let theirs: Vec<&[usize]> = fresh.params().iter().map(|t| t.shape()).collect();
        if ours != theirs || self.head.kind != fresh.head.kind {
            return Err(Error::Format(
                "model tensors do not match their configuration".into(),
            ));
        }
        if let (Body::Mlp { layers: a }, Body::Mlp { layers: b }) = (&self.body, &fresh.body) {
            if a.iter()
                .zip(b)
                .any(|(x, y)| x.kind != y.kind || x.activation != y.activation)
            {
                return Err(Error::Format(
                    "layer kinds do not match the configuration".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Splits `batch × T × F` into `T` matrices of shape `batch × F`.
fn time_slices(x: &Tensor) -> Result<Vec<Tensor>> {
    let &[n, steps, f] = x.shape() else {
        return Err(Error::invalid(format!(
            "expected a rank-3 input, got {:?}",
            x.shape()
        )));
    };
    let d = x.data();
    (0..steps)
        .map(|t| {
            let mut buf = Vec::with_capacity(n * f);
            for i in 0..n {
                let start = (i * steps + t) * f;
                buf.extend_from_slice(&d[start..start + f]);
            }
            Tensor::new(vec![n, f], buf)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mlp_baseline_parameter_count() {
        let cfg = ModelConfig::new(Architecture::Mlp, UqMethod::Baseline, 8, 1);
        let m = build_model(&cfg, &mut RngStream::new(1)).unwrap();
        // 96·32 + 32 + 32·32 + 32 + 32·2 + 2
        assert_eq!(m.parameter_count(), 4226);
        assert_eq!(
            m.parameter_count(),
            96 * 32 + 32 + 32 * 32 + 32 + 32 * 2 + 2
        );
    }

    #[test]
    fn lstm_structure() {
        let cfg = ModelConfig::new(Architecture::Lstm, UqMethod::Flipout, 3, 4);
        let m = build_model(&cfg, &mut RngStream::new(1)).unwrap();
        assert_eq!(m.lstm_layer_count(), 2);
        assert_eq!(m.dense_layer_count(), 1);
        assert_eq!(m.params().len(), 2 * 12 + 4);
        assert_eq!(m.param_names().len(), m.params().len());
    }

    #[test]
    fn deterministic_dropout_forward_repeats() {
        let cfg = ModelConfig::new(Architecture::Mlp, UqMethod::Dropout, 2, 3);
        let m = build_model(&cfg, &mut RngStream::new(5)).unwrap();
        let x =
            crate::ndcore::sample_gaussian(&[4, 12, 2], 0.0, 1.0, &mut RngStream::new(9)).unwrap();
        let a = m.forward_deterministic(&x).unwrap();
        let b = m.forward_deterministic(&x).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shape(), &[4, 3]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ModelConfig::new(Architecture::Mlp, UqMethod::Dropout, 2, 13);
        assert!(build_model(&cfg, &mut RngStream::new(0)).is_err());
        cfg.horizon = 1;
        cfg.drop_prob = 1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.drop_prob = 0.2;
        cfg.mc_samples = 1;
        assert!(cfg.validate().is_err());
        cfg.mc_samples = 2;
        cfg.ensemble_size = 0;
        assert!(cfg.validate().is_ok());
        cfg.method = UqMethod::Ensemble;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in UqMethod::ALL {
            assert_eq!(m.key().parse::<UqMethod>().unwrap(), m);
        }
        assert!("nope".parse::<UqMethod>().is_err());
    }

    #[test]
    fn input_shape_checked() {
        let cfg = ModelConfig::new(Architecture::Lstm, UqMethod::Baseline, 2, 1);
        let m = build_model(&cfg, &mut RngStream::new(0)).unwrap();
        assert!(m
            .forward_deterministic(&Tensor::zeros(&[1, 11, 2]))
            .is_err());
        assert!(m.forward_deterministic(&Tensor::zeros(&[1, 12, 2])).is_ok());
    }
}
