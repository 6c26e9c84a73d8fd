//! End-to-end runs of the `dfst` binary on synthetic sequences.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dfst::harness::{load_sequence, read_results, synth_sequence, SynthSpec};
use tempfile::TempDir;

fn dfst(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfst"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path) {
    fs::write(
        dir.join("spec.toml"),
        "name = \"cli\"\nframes = 8\nvelocity = [2.0, 1.0]\n",
    )
    .unwrap();
}

#[test]
fn synth_then_run_then_metrics() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write_spec(dir);

    let out = dfst(&["synth", "--spec", "spec.toml", "--out", "seq"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let seq = load_sequence(&dir.join("seq")).unwrap();
    assert_eq!(seq.len(), 8);

    // the written frames reproduce the in-memory rendering
    let spec: SynthSpec = toml::from_str(&fs::read_to_string(dir.join("spec.toml")).unwrap()).unwrap();
    let mem = synth_sequence(&spec).unwrap();
    assert_eq!(*seq.frame(3).unwrap(), *mem.frame(3).unwrap());

    let out = dfst(
        &["run", "--sequence", "seq", "--output", "out", "--render", "--dump-ranking"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let boxes = read_results(&dir.join("out/results.txt")).unwrap();
    assert_eq!(boxes.len(), 8);
    assert_eq!(fs::read_dir(dir.join("out/overlay")).unwrap().count(), 8);
    let ranking = fs::read_to_string(dir.join("out/ranking.csv")).unwrap();
    // one record per frame, the first from initialization
    let frames: Vec<&str> = ranking.lines().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(frames, ["0", "1", "2", "3", "4", "5", "6", "7"]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap();
    assert!(report["mean_iou"].as_f64().unwrap() > 0.5);

    let out = dfst(
        &["metrics", "--results", "out/results.txt", "--groundtruth", "seq/groundtruth.txt"],
        dir,
    );
    assert!(out.status.success());
    let metrics: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(metrics["frames_evaluated"], 7);
    assert_eq!(metrics["failures"], 0);
}

#[test]
fn synthetic_run_with_overrides() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write_spec(dir);
    fs::write(dir.join("cfg.toml"), "num_selected = 6\ncompressed_dim = 3\n").unwrap();
    let out = dfst(
        &["run", "--synthetic", "spec.toml", "--config", "cfg.toml", "--set", "scale_adapt=false", "--output", "o"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["num_selected"], 6);
    assert_eq!(report["config"]["compressed_dim"], 3);
    assert_eq!(report["config"]["scale_adapt"], false);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write_spec(dir);

    assert_eq!(dfst(&["--help"], dir).status.code(), Some(0));
    assert_eq!(dfst(&["frobnicate"], dir).status.code(), Some(1));
    assert_eq!(dfst(&["run"], dir).status.code(), Some(1));
    assert_eq!(
        dfst(&["run", "--synthetic", "spec.toml", "--set", "lambda_reg=-1"], dir).status.code(),
        Some(1)
    );
    assert_eq!(dfst(&["run", "--sequence", "missing"], dir).status.code(), Some(2));
    assert_eq!(
        dfst(&["run", "--synthetic", "spec.toml", "--cn-table", "nope.csv"], dir).status.code(),
        Some(2)
    );
    fs::write(dir.join("bad.txt"), "1,2,3\n").unwrap();
    assert_eq!(
        dfst(&["metrics", "--results", "bad.txt", "--groundtruth", "bad.txt"], dir).status.code(),
        Some(2)
    );
}

#[test]
fn cn_table_file_is_used() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write_spec(dir);
    dfst::CnTable::prototype().write_csv(&dir.join("cn.csv")).unwrap();
    let out = dfst(&["run", "--synthetic", "spec.toml", "--cn-table", "cn.csv", "--output", "o"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!String::from_utf8_lossy(&out.stderr).contains("prototype"));
}
