//! Runs the tracker over a few synthetic scenes and prints a metrics table.

use std::sync::Arc;

use dfst::harness::{run_tracker, synth_sequence, Background, SynthSpec};
use dfst::{CnTable, TrackerConfig};

fn main() -> dfst::Result<()> {
    let cn = Arc::new(CnTable::prototype());
    let scenes = [
        ("translate", SynthSpec { velocity: [3.0, 0.0], start: Some([60.0, 120.0]), ..Default::default() }),
        ("diagonal", SynthSpec { velocity: [2.0, 1.5], start: Some([70.0, 60.0]), ..Default::default() }),
        ("grow", SynthSpec { scale_rate: 0.01, ..Default::default() }),
        ("plain", SynthSpec {
            velocity: [2.0, 0.0],
            start: Some([80.0, 120.0]),
            background: Background::Uniform { color: [110, 110, 110] },
            ..Default::default()
        }),
    ];
    println!("{:<10} {:>8} {:>8} {:>6} {:>8}", "scene", "iou", "prec@20", "fail", "fps");
    for (name, spec) in scenes {
        let seq = synth_sequence(&spec)?;
        let r = run_tracker(&seq, &TrackerConfig::default(), cn.clone())?;
        let m = r.metrics(&seq.groundtruth)?;
        println!("{name:<10} {:8.3} {:8.3} {:6} {:8.1}", m.mean_iou, m.precision_20, m.failures, r.fps);
    }
    Ok(())
}
