//! Browser front end: train a small model on a noisy sine and inspect its
//! uncertainty. The [`Session`] API is plain Rust; the `wasm` module wraps
//! it for JavaScript and hands results over as JSON strings.

use serde::Serialize;
use tsuq::dataio::SynthKind;
use tsuq::harness::{
    classify_conf_error, train_and_predict, DatasetConfig, ExperimentConfig, TrainedRun,
};
use tsuq::metrics::{
    bundle, default_levels, ece, error_vs_confidence, reliability_curve, MetricBundle, CONF_STEPS,
};
use tsuq::neural::{Architecture, UqMethod};
use tsuq::{Error, Result};

mod wasm;

pub const SERIES_LEN: usize = 600;
pub const NOISE: f64 = 0.1;
pub const HIDDEN_UNITS: usize = 16;
pub const MAX_EPOCHS: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct Forecast {
    pub architecture: String,
    pub method: String,
    /// Held-out targets and predictions in original units, one step ahead.
    pub y: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub metrics: MetricBundle,
    pub final_loss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reliability {
    pub scale: f64,
    pub levels: Vec<f64>,
    pub coverage: Vec<f64>,
    pub ece: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfError {
    pub x: Vec<f64>,
    pub mae: Vec<f64>,
    pub retained: Vec<usize>,
    pub label: String,
}

/// Holds the most recent trained run so the curves can be redrawn
/// without retraining.
#[derive(Debug, Default)]
pub struct Session {
    last: Option<TrainedRun>,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forecast(
        &mut self,
        architecture: &str,
        method: &str,
        epochs: usize,
        seed: u64,
    ) -> Result<Forecast> {
        let arch: Architecture = architecture.parse()?;
        let method: UqMethod = method.parse()?;
        if !(1..=MAX_EPOCHS).contains(&epochs) {
            return Err(Error::Config(format!(
                "epochs must lie in 1..={MAX_EPOCHS}, got {epochs}"
            )));
        }
        let mut cfg = ExperimentConfig::new(
            DatasetConfig::synthetic(SynthKind::Sine, SERIES_LEN, NOISE),
            arch,
            method,
        );
        cfg.seed = seed;
        cfg.jobs = 1;
        cfg.model.hidden_units = HIDDEN_UNITS;
        cfg.train.epochs = epochs;
        cfg.validate()?;
        let frames = cfg.dataset.load(seed)?;
        let run = train_and_predict(&cfg, &frames, 1)?;
        let pd = &run.prediction;
        let scale = run.test.target_scale;
        let out = Forecast {
            architecture: arch.to_string(),
            method: method.to_string(),
            y: run
                .test
                .y
                .data()
                .iter()
                .map(|&v| scale.descale(v))
                .collect(),
            mean: pd.mean.data().iter().map(|&v| scale.descale(v)).collect(),
            std: pd.std.data().iter().map(|&s| s * scale.std).collect(),
            metrics: bundle(&run.test.y, &pd.mean, &pd.std, scale)?,
            final_loss: run.final_loss.iter().sum::<f64>() / run.final_loss.len() as f64,
        };
        self.last = Some(run);
        Ok(out)
    }

    fn run(&self) -> Result<&TrainedRun> {
        self.last
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("train a model first".into()))
    }

    /// Coverage of the last forecast with every σ multiplied by `scale`.
    pub fn reliability(&self, scale: f64) -> Result<Reliability> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "σ scale must be positive, got {scale}"
            )));
        }
        let run = self.run()?;
        let pd = run.prediction.with_scaled_std(scale);
        let curve = reliability_curve(&run.test.y, &pd.mean, &pd.std, &default_levels())?;
        Ok(Reliability {
            scale,
            ece: ece(&curve),
            levels: curve.levels,
            coverage: curve.coverage,
        })
    }

    pub fn conf_error(&self) -> Result<ConfError> {
        let run = self.run()?;
        let pd = &run.prediction;
        let curve = error_vs_confidence(&run.test.y, &pd.mean, &pd.std, CONF_STEPS)?;
        let label = classify_conf_error(&curve)
            .map(|l| l.to_string())
            .unwrap_or_else(|_| "n/a".into());
        Ok(ConfError {
            x: curve.x,
            mae: curve.mae,
            retained: curve.retained,
            label,
        })
    }
}
