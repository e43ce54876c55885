//! Config files: TOML with four sections. Every key is optional and falls
//! back to the documented default.
//!
//! ```toml
//! [experiment]
//! seed = 0
//! mode = "single"        # single | sweep
//! out_dir = "runs"
//! conf_steps = 20
//! jobs = 1
//!
//! [dataset]
//! source = "synth"       # pm25 | jena | synth
//! path = "PRSA_data.csv" # required for pm25 and jena
//! synth = "sine"         # sine | ar1 | linear
//! n = 2000
//! noise = 0.1
//! train_fraction = 0.8
//!
//! [model]
//! architecture = "mlp"   # mlp | lstm
//! method = "baseline"    # baseline | ensemble | dropout | dropconnect | bbb | flipout
//! hidden_units = 32
//! hidden_layers = 2
//! past = 12
//! drop_prob = 0.2        # default 0.2 for dropout, 0.05 for dropconnect
//! mc_samples = 50
//! ensemble_size = 10
//! prior_std = 1.0
//!
//! [train]
//! learning_rate = 0.001
//! epochs = 100
//! batch_size = 32
//! kl_weight = 0.01       # default: one over the number of minibatches
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use toml::{Table, Value};
use tsuq::dataio::SynthKind;
use tsuq::harness::{DatasetConfig, DatasetSource, ExperimentConfig, HorizonMode};
use tsuq::neural::{Architecture, UqMethod};

/// Every accepted `section.key`.
pub const KNOWN_KEYS: &[&str] = &[
    "experiment.seed",
    "experiment.mode",
    "experiment.out_dir",
    "experiment.conf_steps",
    "experiment.jobs",
    "dataset.source",
    "dataset.path",
    "dataset.synth",
    "dataset.n",
    "dataset.noise",
    "dataset.train_fraction",
    "model.architecture",
    "model.method",
    "model.hidden_units",
    "model.hidden_layers",
    "model.past",
    "model.drop_prob",
    "model.mc_samples",
    "model.ensemble_size",
    "model.prior_std",
    "train.learning_rate",
    "train.epochs",
    "train.batch_size",
    "train.kl_weight",
];

/// A problem with the user's input rather than with the run itself.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ExperimentSection {
    seed: Option<u64>,
    mode: Option<HorizonMode>,
    out_dir: Option<PathBuf>,
    conf_steps: Option<usize>,
    jobs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DatasetSection {
    source: Option<DatasetSource>,
    path: Option<PathBuf>,
    synth: Option<SynthKind>,
    n: Option<usize>,
    noise: Option<f64>,
    train_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ModelSection {
    architecture: Option<Architecture>,
    method: Option<UqMethod>,
    hidden_units: Option<usize>,
    hidden_layers: Option<usize>,
    past: Option<usize>,
    drop_prob: Option<f64>,
    mc_samples: Option<usize>,
    ensemble_size: Option<usize>,
    prior_std: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainSection {
    learning_rate: Option<f64>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    kl_weight: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    experiment: ExperimentSection,
    dataset: DatasetSection,
    model: ModelSection,
    train: TrainSection,
}

fn check_keys(table: &Table, origin: &str) -> Result<()> {
    for (section, body) in table {
        let Value::Table(inner) = body else {
            bail!(usage(format!("{origin}: `{section}` must be a section")));
        };
        for key in inner.keys() {
            let full = format!("{section}.{key}");
            if !KNOWN_KEYS.contains(&full.as_str()) {
                bail!(usage(format!("{origin}: unknown config key `{full}`")));
            }
        }
    }
    Ok(())
}

/// Parses `section.key=value`. The value is read as a TOML literal and
/// falls back to a bare string.
fn apply_override(table: &mut Table, arg: &str) -> Result<()> {
    let Some((key, raw)) = arg.split_once('=') else {
        bail!(usage(format!(
            "override `{arg}` is not of the form section.key=value"
        )));
    };
    let key = key.trim();
    if !KNOWN_KEYS.contains(&key) {
        bail!(usage(format!("unknown config key `{key}` in --set")));
    }
    let (section, name) = key.split_once('.').expect("known keys are dotted");
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    match entry {
        Value::Table(t) => {
            t.insert(name.to_string(), value);
            Ok(())
        }
        _ => Err(usage(format!("`{section}` must be a section"))),
    }
}

/// Reads an optional config file, applies overrides and builds the
/// experiment configuration.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut table = match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let table: Table = text
                .parse()
                .map_err(|e| usage(format!("{}: {e}", p.display())))?;
            check_keys(&table, &p.display().to_string())?;
            table
        }
        None => Table::new(),
    };
    for arg in overrides {
        apply_override(&mut table, arg)?;
    }
    let file: FileConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| usage(format!("invalid config: {}", e.message())))?;
    Ok(build(file))
}

fn build(file: FileConfig) -> ExperimentConfig {
    let d = file.dataset;
    let mut dataset = DatasetConfig::synthetic(d.synth.unwrap_or(SynthKind::Sine), 2000, 0.1);
    dataset.source = d.source.unwrap_or(DatasetSource::Synth);
    dataset.path = d.path;
    if let Some(n) = d.n {
        dataset.n = n;
    }
    if let Some(v) = d.noise {
        dataset.noise = v;
    }
    if let Some(v) = d.train_fraction {
        dataset.train_fraction = v;
    }

    let m = file.model;
    let arch = m.architecture.unwrap_or(Architecture::Mlp);
    let method = m.method.unwrap_or(UqMethod::Baseline);
    let mut cfg = ExperimentConfig::new(dataset, arch, method);
    let e = file.experiment;
    cfg.seed = e.seed.unwrap_or(cfg.seed);
    cfg.mode = e.mode.unwrap_or(cfg.mode);
    cfg.out_dir = e.out_dir.unwrap_or(cfg.out_dir);
    cfg.conf_steps = e.conf_steps.unwrap_or(cfg.conf_steps);
    cfg.jobs = e.jobs.unwrap_or(cfg.jobs);

    let mc = &mut cfg.model;
    mc.hidden_units = m.hidden_units.unwrap_or(mc.hidden_units);
    mc.hidden_layers = m.hidden_layers.unwrap_or(mc.hidden_layers);
    mc.past = m.past.unwrap_or(mc.past);
    mc.drop_prob = m.drop_prob.unwrap_or(mc.drop_prob);
    mc.mc_samples = m.mc_samples.unwrap_or(mc.mc_samples);
    mc.ensemble_size = m.ensemble_size.unwrap_or(mc.ensemble_size);
    mc.prior_std = m.prior_std.unwrap_or(mc.prior_std);

    let t = file.train;
    let tc = &mut cfg.train;
    tc.learning_rate = t.learning_rate.unwrap_or(tc.learning_rate);
    tc.epochs = t.epochs.unwrap_or(tc.epochs);
    tc.batch_size = t.batch_size.unwrap_or(tc.batch_size);
    tc.kl_weight = t.kl_weight.or(tc.kl_weight);
    cfg
}
