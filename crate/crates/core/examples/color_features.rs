//! Builds the 11-channel feature map for a synthetic frame and prints
//! per-channel statistics.

use dfst::harness::{synth_sequence, SynthSpec};
use dfst::imaging::{build_feature_map, extract_patch};
use dfst::CnTable;

fn main() -> dfst::Result<()> {
    let seq = synth_sequence(&SynthSpec::default())?;
    let frame = seq.frame(0)?;
    let bbox = seq.initial_box();
    let patch = extract_patch(&frame, &bbox.with_size(bbox.w * 2.0, bbox.h * 2.0))?;
    let map = build_feature_map(&patch, &CnTable::prototype());

    println!("patch {}x{}, {} channels", map.width(), map.height(), map.channels());
    for (c, plane) in map.planes().enumerate() {
        let n = plane.len() as f64;
        let mean = plane.iter().sum::<f64>() / n;
        let rms = (plane.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        let name = if c == 0 { "luminance".to_string() } else { format!("cn{}", c - 1) };
        println!("{name:>10}  mean {mean:+.4}  rms {rms:.4}");
    }
    Ok(())
}
