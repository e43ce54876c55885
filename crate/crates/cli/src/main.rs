mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use tsuq::dataio::{synth_series, SynthKind};
use tsuq::harness::{
    emit_ranking, emit_report, evaluate_models, load_checkpoints, load_reports, model_dir_name,
    rank_models, render_ranking, run_experiment, run_grid, ExperimentConfig, HorizonMode,
    MetricReport,
};
use tsuq::metrics::MetricBundle;

use config::UsageError;

#[derive(Parser)]
#[command(
    name = "tsuq",
    version,
    about = "Uncertainty-quantification benchmark for time-series regression"
)]
struct Cli {
    /// Suppress progress output
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file (every key optional)
    #[arg(long, short)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set train.epochs=5` (repeatable)
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,

    /// Output root (overrides experiment.out_dir)
    #[arg(long, short)]
    out: Option<PathBuf>,

    /// Random seed (overrides experiment.seed)
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = config::load(self.config.as_deref(), &self.overrides)?;
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train one model (or ensemble), score it and write its report
    Train(RunArgs),
    /// Re-score the saved checkpoints of a configured experiment
    Evaluate(RunArgs),
    /// Run all twelve architecture/method pairs with horizon sweeps and rank them
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Experiments to run in parallel
        #[arg(long, short, default_value_t = 1)]
        jobs: usize,
    },
    /// Rank twelve completed reports in a dataset directory
    Rank {
        /// Dataset directory, e.g. runs/synth_sine
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
    },
    /// Print the scores of every report in a dataset directory
    Report {
        /// Dataset directory, e.g. runs/synth_sine
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
    },
    /// Write a synthetic series as CSV
    Synth {
        #[arg(long, default_value = "sine")]
        kind: SynthKind,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination file
        #[arg(long, short)]
        out: PathBuf,
    },
}

struct Progress {
    quiet: bool,
}

impl Progress {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn fmt_bundle(b: &MetricBundle) -> String {
    format!(
        "MAPE {:.2}  MSE {:.4}  R2 {:.4}  ECE {:.4}  NLL {:.4}",
        b.mape, b.mse, b.r2, b.ece, b.nll
    )
}

fn train(args: &RunArgs, p: &Progress) -> Result<()> {
    let cfg = args.load()?;
    p.say(format!(
        "training {} ({:?} mode, seed {})",
        cfg.id(),
        cfg.mode,
        cfg.seed
    ));
    let run = run_experiment(&cfg)?;
    let dir = emit_report(&run, &cfg.out_dir)?;
    p.say(format!("test: {}", fmt_bundle(&run.report.summary)));
    p.say(format!("report written to {}", dir.display()));
    Ok(())
}

fn evaluate(args: &RunArgs, p: &Progress) -> Result<()> {
    let cfg = args.load()?;
    let dir = cfg
        .out_dir
        .join(cfg.dataset.id())
        .join(model_dir_name(cfg.model.architecture, cfg.model.method))
        .join("checkpoints");
    let models = load_checkpoints(&dir)?;
    p.say(format!(
        "evaluating {} checkpoint(s) from {}",
        models.len(),
        dir.display()
    ));
    let scores = evaluate_models(&cfg, &models)?;
    // the score line is the command's result, so it is printed even with --quiet
    println!("{}", fmt_bundle(&scores));
    Ok(())
}

fn sweep(args: &RunArgs, jobs: usize, p: &Progress) -> Result<()> {
    let mut cfg = args.load()?;
    cfg.mode = HorizonMode::Sweep;
    p.say(format!(
        "running 12 experiments on {} with {jobs} job(s)",
        cfg.dataset.id()
    ));
    let runs = run_grid(&cfg, jobs)?;
    for run in &runs {
        emit_report(run, &cfg.out_dir)?;
        p.say(format!(
            "{:<18} {}",
            format!("{} {}", run.report.architecture, run.report.method),
            fmt_bundle(&run.report.summary)
        ));
    }
    let dataset_dir = cfg.out_dir.join(cfg.dataset.id());
    let table = rank_models(
        &runs
            .iter()
            .map(|r| r.report.rank_entry())
            .collect::<Vec<_>>(),
    )?;
    emit_ranking(&table, &dataset_dir)?;
    p.say(render_ranking(&table));
    p.say(format!(
        "ranking written to {}",
        dataset_dir.join("ranking.csv").display()
    ));
    Ok(())
}

fn reports_in(dir: &Path) -> Result<Vec<MetricReport>> {
    let reports = load_reports(dir)?;
    if reports.is_empty() {
        anyhow::bail!("no reports found in {}", dir.display());
    }
    Ok(reports)
}

fn rank(input: &Path, p: &Progress) -> Result<()> {
    let reports = reports_in(input)?;
    let table = rank_models(
        &reports
            .iter()
            .map(MetricReport::rank_entry)
            .collect::<Vec<_>>(),
    )
    .with_context(|| format!("ranking {}", input.display()))?;
    emit_ranking(&table, input)?;
    p.say(render_ranking(&table));
    p.say(format!(
        "ranking written to {}",
        input.join("ranking.csv").display()
    ));
    Ok(())
}

fn report(input: &Path) -> Result<()> {
    for r in reports_in(input)? {
        let label =
            |l: Option<tsuq::harness::QualLabel>| l.map_or("n/a".to_string(), |l| l.to_string());
        println!(
            "{:<18} {}  horizon {}  conf-error {}",
            format!("{} {}", r.architecture, r.method),
            fmt_bundle(&r.summary),
            label(r.horizon_label),
            label(r.conf_label)
        );
    }
    let ranking = input.join("ranking.txt");
    if ranking.is_file() {
        println!();
        print!(
            "{}",
            std::fs::read_to_string(&ranking)
                .with_context(|| format!("reading {}", ranking.display()))?
        );
    }
    Ok(())
}

fn synth(kind: SynthKind, n: usize, noise: f64, seed: u64, out: &Path, p: &Progress) -> Result<()> {
    let frame = synth_series(kind, n, noise, seed)?;
    let mut text = String::from("timestamp,value\n");
    for (t, v) in frame.timestamps.iter().zip(frame.target_values()) {
        text.push_str(&format!("{t},{v:.16e}\n"));
    }
    tsuq::fsutil::write_atomic(out, text.as_bytes())?;
    p.say(format!("wrote {n} rows to {}", out.display()));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let p = Progress { quiet: cli.quiet };
    match &cli.command {
        Command::Train(args) => train(args, &p),
        Command::Evaluate(args) => evaluate(args, &p),
        Command::Sweep { run, jobs } => sweep(run, *jobs, &p),
        Command::Rank { input } => rank(input, &p),
        Command::Report { input } => report(input),
        Command::Synth {
            kind,
            n,
            noise,
            seed,
            out,
        } => synth(*kind, *n, *noise, *seed, out, &p),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
