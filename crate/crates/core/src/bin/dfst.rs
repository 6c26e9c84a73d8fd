use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use dfst::harness::{
    evaluate, load_sequence, read_results, render_overlay, run_tracker_observed, synth_sequence, write_ranking_csv,
    write_report, write_results, RunReport, Sequence, SynthSpec,
};
use dfst::{CnTable, Error, Result, TrackerConfig};

#[derive(Parser)]
#[command(name = "dfst", version, about = "Dynamic feature selection tracker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track one sequence and write results, report and optional extras.
    Run(RunArgs),
    /// Render a synthetic sequence to disk.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score an existing results file against ground truth.
    Metrics {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        groundtruth: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// sequence directory with frames and groundtruth.txt
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    sequence: Option<PathBuf>,
    /// synthetic sequence spec (TOML) used instead of --sequence
    #[arg(long)]
    synthetic: Option<PathBuf>,
    /// color-name table (CSV, or raw f64 with .bin); built-in prototypes when omitted
    #[arg(long)]
    cn_table: Option<PathBuf>,
    /// tracker config (TOML or JSON)
    #[arg(long)]
    config: Option<PathBuf>,
    /// config override, key=value; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value = "dfst-out")]
    output: PathBuf,
    /// write frames with predicted and ground-truth boxes
    #[arg(long)]
    render: bool,
    /// write per-frame feature ranking as CSV
    #[arg(long)]
    dump_ranking: bool,
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
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Synth { spec, out } => synth(&spec, &out),
        Command::Metrics { results, groundtruth } => metrics(&results, &groundtruth),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_spec(path: &Path) -> Result<SynthSpec> {
    toml::from_str(&read_text(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(args: RunArgs) -> Result<()> {
    let base = match &args.config {
        Some(p) => TrackerConfig::from_str_auto(&read_text(p)?)?,
        None => TrackerConfig::default(),
    };
    let cfg = base.with_overrides(args.overrides.iter().map(String::as_str))?;
    let cn = match &args.cn_table {
        Some(p) => CnTable::load(p)?,
        None => {
            eprintln!("note: no --cn-table given, using built-in prototype color names");
            CnTable::prototype()
        }
    };
    let seq: Sequence = match (&args.sequence, &args.synthetic) {
        (Some(dir), _) => load_sequence(dir)?,
        (None, Some(spec)) => synth_sequence(&load_spec(spec)?)?,
        (None, None) => unreachable!("clap requires one source"),
    };

    let mut rankings = Vec::new();
    let result = run_tracker_observed(&seq, &cfg, Arc::new(cn), |i, t| {
        if args.dump_ranking {
            if let Some(r) = t.last_report() {
                rankings.push((i, r.ranking.clone()));
            }
        }
        Ok(())
    })?;

    create_dir(&args.output)?;
    write_results(&result.boxes, &args.output.join("results.txt"))?;
    let report = RunReport::new(&seq, &result)?;
    write_report(&report, &args.output.join("report.json"))?;
    if args.dump_ranking {
        write_ranking_csv(&rankings, &args.output.join("ranking.csv"))?;
    }
    if args.render {
        render_overlay(&seq, &result, &args.output.join("overlay"))?;
    }
    println!(
        "{}: {} frames, mean IoU {:.3}, precision@20 {:.3}, failures {}, {:.1} fps",
        report.sequence, report.frames, report.mean_iou, report.precision_20, report.failures, report.fps
    );
    Ok(())
}

fn synth(spec: &Path, out: &Path) -> Result<()> {
    let seq = synth_sequence(&load_spec(spec)?)?;
    create_dir(out)?;
    for i in 0..seq.len() {
        seq.frame(i)?.save(&out.join(format!("{:08}.png", i + 1)))?;
    }
    write_results(&seq.groundtruth, &out.join("groundtruth.txt"))?;
    println!("wrote {} frames to {}", seq.len(), out.display());
    Ok(())
}

fn metrics(results: &Path, groundtruth: &Path) -> Result<()> {
    let predicted = read_results(results)?;
    let gt = dfst::harness::parse_groundtruth(&read_text(groundtruth)?)?;
    let report = evaluate(&predicted, &gt)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| Error::Numeric(e.to_string()))?
    );
    Ok(())
}
