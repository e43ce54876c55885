//! Experiment orchestration: load data, train one model or an ensemble,
//! predict on the held-out split and score the result.

mod classify;
mod rank;
mod report;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dataio::{
    load_jena, load_pm25, synth_series, train_test_windows, FrameTable, SynthKind, WindowSet,
};
use crate::error::{Error, Result};
use crate::metrics::{
    bundle, default_levels, error_vs_confidence, reliability_curve, ConfidenceErrorCurve,
    MetricBundle, ReliabilityCurve, CONF_STEPS,
};
use crate::ndcore::{RngStream, Tensor};
use crate::neural::{
    build_model, train, Architecture, Model, ModelConfig, TrainConfig, UqMethod, MAX_HORIZON,
};
use crate::uq::{baseline_predict, ensemble_predict, mc_predict, PredictiveDistribution};

pub use classify::{
    classify_conf_error, classify_conf_error_with, classify_horizon, classify_horizon_with,
    spearman, QualLabel, Thresholds,
};
pub use rank::{canonical_rows, rank_models, RankEntry, RankRow, RankingTable};
pub use report::{
    emit_ranking, emit_report, load_report, load_reports, model_dir_name, read_ranking_csv,
    render_ranking,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Pm25,
    Jena,
    Synth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub source: DatasetSource,
    /// CSV file for the real datasets.
    pub path: Option<PathBuf>,
    pub synth: SynthKind,
    pub n: usize,
    pub noise: f64,
    pub train_fraction: f64,
}

impl DatasetConfig {
    pub fn synthetic(kind: SynthKind, n: usize, noise: f64) -> Self {
        Self {
            source: DatasetSource::Synth,
            path: None,
            synth: kind,
            n,
            noise,
            train_fraction: crate::dataio::DEFAULT_TRAIN_FRACTION,
        }
    }

    pub fn file(source: DatasetSource, path: impl Into<PathBuf>) -> Self {
        Self {
            source,
            path: Some(path.into()),
            ..Self::synthetic(SynthKind::Sine, 2000, 0.1)
        }
    }

    /// Directory name used in reports: `pm25`, `jena` or `synth_<kind>`.
    pub fn id(&self) -> String {
        match self.source {
            DatasetSource::Pm25 => "pm25".into(),
            DatasetSource::Jena => "jena".into(),
            DatasetSource::Synth => format!("synth_{}", self.synth.key()),
        }
    }

    pub fn load(&self, seed: u64) -> Result<FrameTable> {
        let path = || {
            self.path
                .as_ref()
                .ok_or_else(|| Error::Config(format!("dataset `{}` needs a file path", self.id())))
        };
        match self.source {
            DatasetSource::Pm25 => load_pm25(path()?),
            DatasetSource::Jena => load_jena(path()?),
            DatasetSource::Synth => synth_series(self.synth, self.n, self.noise, seed),
        }
    }
}

/// Single trains at H=1 only; Sweep also trains at H=12 for per-step scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HorizonMode {
    Single,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    /// `features` and `horizon` are filled in from the data and the mode.
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub mode: HorizonMode,
    pub out_dir: PathBuf,
    pub conf_steps: usize,
    pub seed: u64,
    /// Worker threads for ensemble members.
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetConfig, architecture: Architecture, method: UqMethod) -> Self {
        Self {
            dataset,
            model: ModelConfig::new(architecture, method, 1, 1),
            train: TrainConfig::for_method(method),
            mode: HorizonMode::Single,
            out_dir: PathBuf::from("runs"),
            conf_steps: CONF_STEPS,
            seed: 0,
            jobs: 1,
        }
    }

    /// `<dataset>/<arch>_<method>`, used to tag errors.
    pub fn id(&self) -> String {
        format!(
            "{}/{}",
            self.dataset.id(),
            model_dir_name(self.model.architecture, self.model.method)
        )
    }

    /// Same experiment with another architecture and method, keeping every
    /// shared setting.
    pub fn with_model(&self, architecture: Architecture, method: UqMethod) -> Self {
        let mut cfg = self.clone();
        cfg.model.architecture = architecture;
        cfg.model.method = method;
        cfg.model.drop_prob = method.default_drop_prob();
        cfg.train.loss = crate::neural::LossKind::for_method(method);
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate(self.model.method)?;
        if self.conf_steps < 2 {
            return Err(Error::Config("conf_steps must be at least 2".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        let mut probe = self.model.clone();
        probe.horizon = 1;
        probe.validate()
    }
}

/// Scores and curves of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dataset: String,
    pub architecture: Architecture,
    pub method: UqMethod,
    pub seed: u64,
    pub test_windows: usize,
    /// H=1 scores.
    pub summary: MetricBundle,
    /// Scores of output steps 1..=12 of the H=12 model (empty in single mode).
    pub per_step: Vec<MetricBundle>,
    pub reliability: ReliabilityCurve,
    pub conf_error: ConfidenceErrorCurve,
    pub horizon_label: Option<QualLabel>,
    pub conf_label: Option<QualLabel>,
    /// Mean loss of the last epoch, one entry per trained network (H=1).
    pub final_loss: Vec<f64>,
}

impl MetricReport {
    pub fn rank_entry(&self) -> RankEntry {
        RankEntry {
            architecture: self.architecture,
            method: self.method,
            bundle: self.summary,
            horizon: self.horizon_label,
            conf_error: self.conf_label,
        }
    }
}

/// Trained networks plus the held-out predictions for one horizon.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub models: Vec<Model>,
    pub final_loss: Vec<f64>,
    pub test: WindowSet,
    pub prediction: PredictiveDistribution,
}

/// Everything [`emit_report`] writes.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub report: MetricReport,
    pub single: TrainedRun,
    pub sweep: Option<TrainedRun>,
}

fn horizon_stream(seed: u64, horizon: usize) -> RngStream {
    RngStream::new(seed).split(&format!("horizon-{horizon}"))
}

fn train_one(
    cfg: &ModelConfig,
    tcfg: &TrainConfig,
    train_set: &WindowSet,
    rng: &RngStream,
) -> Result<(Model, f64)> {
    let model = build_model(cfg, &mut rng.split("init"))?;
    let (model, history) = train(model, train_set, tcfg, &mut rng.split("train"))?;
    Ok((model, history.last().copied().unwrap_or(f64::NAN)))
}

/// Trains ensemble members on up to `jobs` threads. Member `k` only ever
/// sees stream `member/k`, so the result is independent of `jobs`.
fn train_members(
    cfg: &ModelConfig,
    tcfg: &TrainConfig,
    train_set: &WindowSet,
    root: &RngStream,
    jobs: usize,
) -> Result<Vec<(Model, f64)>> {
    let count = cfg.ensemble_size;
    let streams: Vec<RngStream> = (0..count)
        .map(|k| root.split("member").split_index(k as u64))
        .collect();
    let workers = jobs.clamp(1, count.max(1));
    if workers == 1 {
        return streams
            .iter()
            .map(|s| train_one(cfg, tcfg, train_set, s))
            .collect();
    }
    let mut slots: Vec<Option<Result<(Model, f64)>>> = (0..count).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let streams = &streams;
                scope.spawn(move || {
                    (w..count)
                        .step_by(workers)
                        .map(|k| (k, train_one(cfg, tcfg, train_set, &streams[k])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("ensemble worker panicked") {
                slots[k] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every member trained"))
        .collect()
}

/// Trains at `horizon` and predicts the held-out windows.
pub fn train_and_predict(
    cfg: &ExperimentConfig,
    frames: &FrameTable,
    horizon: usize,
) -> Result<TrainedRun> {
    let mut mcfg = cfg.model.clone();
    let (train_set, test) =
        train_test_windows(frames, cfg.dataset.train_fraction, mcfg.past, horizon)?;
    mcfg.features = train_set.features();
    mcfg.horizon = horizon;
    mcfg.validate()?;
    let root = horizon_stream(cfg.seed, horizon);
    let trained = if mcfg.method == UqMethod::Ensemble {
        train_members(&mcfg, &cfg.train, &train_set, &root, cfg.jobs)?
    } else {
        vec![train_one(&mcfg, &cfg.train, &train_set, &root)?]
    };
    let (models, final_loss): (Vec<Model>, Vec<f64>) = trained.into_iter().unzip();
    let prediction = predict(&models, &test.x, &root.split("predict"))?;
    Ok(TrainedRun {
        models,
        final_loss,
        test,
        prediction,
    })
}

/// Predictive distribution of a trained model (or ensemble) on `x`.
pub fn predict(models: &[Model], x: &Tensor, rng: &RngStream) -> Result<PredictiveDistribution> {
    let first = models
        .first()
        .ok_or_else(|| Error::invalid("no trained models"))?;
    match first.config().method {
        UqMethod::Baseline => baseline_predict(first, x),
        UqMethod::Ensemble => ensemble_predict(models, x),
        _ => mc_predict(first, x, first.config().mc_samples, rng),
    }
}

/// Scores each output step of an H-step prediction separately.
pub fn per_step_metrics(run: &TrainedRun) -> Result<Vec<MetricBundle>> {
    let pd = &run.prediction;
    (0..pd.horizon())
        .map(|h| {
            let y = run.test.y.column_range(h, h + 1)?;
            let mu = pd.mean.column_range(h, h + 1)?;
            let sd = pd.std.column_range(h, h + 1)?;
            bundle(&y, &mu, &sd, run.test.target_scale)
        })
        .collect()
}

/// One H=12 training scored per output step.
pub fn horizon_sweep(
    cfg: &ExperimentConfig,
    frames: &FrameTable,
) -> Result<(Vec<MetricBundle>, TrainedRun)> {
    let run = train_and_predict(cfg, frames, MAX_HORIZON)?;
    Ok((per_step_metrics(&run)?, run))
}

fn run_inner(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let frames = cfg.dataset.load(cfg.seed)?;
    let single = train_and_predict(cfg, &frames, 1)?;
    let pd = &single.prediction;
    let y = &single.test.y;
    let summary = bundle(y, &pd.mean, &pd.std, single.test.target_scale)?;
    let reliability = reliability_curve(y, &pd.mean, &pd.std, &default_levels())?;
    let conf_error = error_vs_confidence(y, &pd.mean, &pd.std, cfg.conf_steps)?;
    let conf_label = classify_conf_error(&conf_error).ok();

    let (per_step, sweep) = match cfg.mode {
        HorizonMode::Single => (Vec::new(), None),
        HorizonMode::Sweep => {
            let (steps, run) = horizon_sweep(cfg, &frames)?;
            (steps, Some(run))
        }
    };
    let horizon_label = if per_step.len() >= 3 {
        Some(classify_horizon(&per_step)?)
    } else {
        None
    };
    let report = MetricReport {
        dataset: cfg.dataset.id(),
        architecture: cfg.model.architecture,
        method: cfg.model.method,
        seed: cfg.seed,
        test_windows: single.test.len(),
        summary,
        per_step,
        reliability,
        conf_error,
        horizon_label,
        conf_label,
        final_loss: single.final_loss.clone(),
    };
    Ok(ExperimentRun {
        config: cfg.clone(),
        report,
        single,
        sweep,
    })
}

/// Load → split → train → predict → score. Errors carry the experiment id.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    run_inner(cfg).map_err(|e| Error::Experiment {
        id: cfg.id(),
        source: Box::new(e),
    })
}

/// Runs the experiment for every architecture × method pair on up to `jobs`
/// threads, returning the runs in table order.
pub fn run_grid(base: &ExperimentConfig, jobs: usize) -> Result<Vec<ExperimentRun>> {
    let configs: Vec<ExperimentConfig> = canonical_rows()
        .into_iter()
        .map(|(a, m)| base.with_model(a, m))
        .collect();
    let workers = jobs.clamp(1, configs.len());
    if workers == 1 {
        return configs.iter().map(run_experiment).collect();
    }
    let mut slots: Vec<Option<Result<ExperimentRun>>> = (0..configs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let configs = &configs;
                scope.spawn(move || {
                    (w..configs.len())
                        .step_by(workers)
                        .map(|k| (k, run_experiment(&configs[k])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("experiment worker panicked") {
                slots[k] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every experiment ran"))
        .collect()
}

/// Loads every checkpoint in a directory, in file-name order.
pub fn load_checkpoints(dir: &std::path::Path) -> Result<Vec<Model>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid(format!(
            "no checkpoints in {}",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| crate::neural::load_checkpoint(p).map(|(m, _)| m))
        .collect()
}

/// Re-scores saved models on the held-out split described by `cfg`.
pub fn evaluate_models(cfg: &ExperimentConfig, models: &[Model]) -> Result<MetricBundle> {
    let first = models
        .first()
        .ok_or_else(|| Error::invalid("no models to evaluate"))?;
    let mc = first.config();
    let frames = cfg.dataset.load(cfg.seed)?;
    let (_, test) = train_test_windows(&frames, cfg.dataset.train_fraction, mc.past, mc.horizon)?;
    if test.features() != mc.features {
        return Err(Error::invalid(format!(
            "checkpoint expects {} features, dataset has {}",
            mc.features,
            test.features()
        )));
    }
    let pd = predict(
        models,
        &test.x,
        &horizon_stream(cfg.seed, mc.horizon).split("predict"),
    )?;
    bundle(&test.y, &pd.mean, &pd.std, test.target_scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(method: UqMethod) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            DatasetConfig::synthetic(SynthKind::Sine, 200, 0.1),
            Architecture::Mlp,
            method,
        );
        cfg.model.hidden_units = 8;
        cfg.model.ensemble_size = 3;
        cfg.model.mc_samples = 5;
        cfg.train.epochs = 2;
        cfg
    }

    #[test]
    fn ensemble_result_independent_of_jobs() {
        let mut cfg = tiny(UqMethod::Ensemble);
        let a = run_experiment(&cfg).unwrap();
        cfg.jobs = 3;
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.single.models.len(), 3);
    }

    #[test]
    fn errors_carry_experiment_id() {
        let mut cfg = tiny(UqMethod::Dropout);
        cfg.dataset.n = 10;
        match run_experiment(&cfg) {
            Err(Error::Experiment { id, .. }) => assert_eq!(id, "synth_sine/mlp_dropout"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evaluation_reproduces_summary() {
        let cfg = tiny(UqMethod::Flipout);
        let run = run_experiment(&cfg).unwrap();
        let again = evaluate_models(&cfg, &run.single.models).unwrap();
        assert_eq!(again, run.report.summary);
    }

    #[test]
    fn sweep_has_twelve_steps() {
        let mut cfg = tiny(UqMethod::Baseline);
        cfg.mode = HorizonMode::Sweep;
        let run = run_experiment(&cfg).unwrap();
        assert_eq!(run.report.per_step.len(), 12);
        assert!(run.report.horizon_label.is_some());
    }
}
