use std::path::Path;
use std::process::{Command, Output};

fn tsuq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsuq"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const QUICK: &[&str] = &[
    "--set",
    "dataset.n=300",
    "--set",
    "model.hidden_units=6",
    "--set",
    "model.ensemble_size=2",
    "--set",
    "model.mc_samples=4",
    "--set",
    "train.epochs=2",
];

fn with_quick(mut head: Vec<&str>) -> Vec<&str> {
    head.extend_from_slice(QUICK);
    head
}

#[test]
fn missing_subcommand_is_usage_error() {
    let o = tsuq(&[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn help_lists_flags() {
    let o = tsuq(&["train", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in ["--config", "--set", "--out", "--seed", "--quiet"] {
        assert!(text.contains(flag), "missing {flag}");
    }
    let o = tsuq(&["sweep", "--help"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("--jobs"));
}

#[test]
fn unknown_key_names_the_token() {
    let o = tsuq(&["train", "--set", "train.epochz=5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("train.epochz"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[model]\nwidth = 3\n").unwrap();
    let o = tsuq(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model.width"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = tsuq(&["train", "--epochs", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--epochs"));
}

#[test]
fn runtime_failure_exits_two() {
    let o = tsuq(&[
        "train",
        "--quiet",
        "--set",
        "dataset.source=pm25",
        "--set",
        "dataset.path=/nonexistent.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nonexistent"));
}

#[test]
fn train_with_config_and_override_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg,
        "[experiment]\nseed = 3\n\n[dataset]\nsource = \"synth\"\nsynth = \"sine\"\n\n[model]\nmethod = \"dropout\"\n\n[train]\nepochs = 50\n",
    )
    .unwrap();
    let args = with_quick(vec![
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "train.epochs=5",
    ]);
    let o = tsuq(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = out.join("synth_sine").join("mlp_dropout");
    for f in [
        "metrics.json",
        "per_horizon.csv",
        "reliability.csv",
        "conf_error.csv",
        "checkpoints/model.json",
    ] {
        assert!(report.join(f).is_file(), "missing {f}");
    }

    let first = std::fs::read(report.join("metrics.json")).unwrap();
    let o = tsuq(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(first, std::fs::read(report.join("metrics.json")).unwrap());

    let mut eval = vec![
        "evaluate",
        "--quiet",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    eval.extend_from_slice(QUICK);
    let o = tsuq(&eval);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("MAPE"));
}

#[test]
fn quiet_silences_progress() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let o = tsuq(&[
        "synth",
        "--quiet",
        "--kind",
        "ar1",
        "--n",
        "50",
        "--noise",
        "0",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 51);
    assert_eq!(lines[0], "timestamp,value");
    let v1: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((v1 - 0.9).abs() < 1e-12);
}

fn ranking_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn sweep_then_rank_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let args = with_quick(vec![
        "sweep",
        "--quiet",
        "--jobs",
        "4",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "dataset.synth=ar1",
    ]);
    let o = tsuq(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ds = out.join("synth_ar1");
    assert_eq!(ranking_rows(&ds.join("ranking.csv")), 12);
    let before = std::fs::read(ds.join("ranking.csv")).unwrap();
    std::fs::remove_file(ds.join("ranking.csv")).unwrap();

    let o = tsuq(&["rank", "--in", ds.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(before, std::fs::read(ds.join("ranking.csv")).unwrap());
    assert!(String::from_utf8_lossy(&o.stdout).contains("LSTM Flipout"));

    let o = tsuq(&["report", "--in", ds.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.contains("horizon")).count(), 12);

    // an incomplete directory cannot be ranked
    std::fs::remove_dir_all(ds.join("mlp_bbb")).unwrap();
    let o = tsuq(&["rank", "--in", ds.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MLP BBB"));
}
