//! Compares dynamic channel selection against always using every channel
//! on a scene with a same-luminance distractor next to the target.

use std::sync::Arc;

use dfst::harness::{run_tracker, same_luminance_color, synth_sequence, Background, Distractor, SynthSpec};
use dfst::{CnTable, TrackerConfig};

fn main() -> dfst::Result<()> {
    let base = SynthSpec::default();
    let spec = SynthSpec {
        frames: 60,
        background: Background::Textured { seed: 3, block: 6 },
        start: Some([90.0, 120.0]),
        velocity: [2.5, 0.0],
        distractor: Some(Distractor {
            color: same_luminance_color(base.target_color),
            offset: [0.0, 42.0],
            size: [40.0, 40.0],
            velocity: Some([0.0, 0.0]),
        }),
        noise: 4.0,
        ..base
    };
    let seq = synth_sequence(&spec)?;
    let cn = Arc::new(CnTable::prototype());
    for (label, k) in [("top 8", 8), ("all 10", 10)] {
        let cfg = TrackerConfig { num_selected: k, ..Default::default() };
        let m = run_tracker(&seq, &cfg, cn.clone())?.metrics(&seq.groundtruth)?;
        println!("{label:<7} mean IoU {:.4}  failures {}", m.mean_iou, m.failures);
    }
    Ok(())
}
