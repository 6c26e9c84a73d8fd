//! Learns a small dictionary from the initial target and uses it to pick
//! the best box among scaled and shifted candidates on a later frame.

use dfst::harness::{synth_sequence, SynthSpec};
use dfst::scale::{generate_candidates, init_dictionary, patch_vector, select_box};

fn main() -> dfst::Result<()> {
    let spec = SynthSpec {
        frames: 30,
        scale_rate: 0.01,
        ..Default::default()
    };
    let seq = synth_sequence(&spec)?;
    let side = 16;
    let seed = patch_vector(&*seq.frame(0)?, &seq.initial_box(), side)?;
    let mut dict = init_dictionary(&[seed], 64, 7, 0.05, 200)?;

    // keep training on the true box for a few frames
    for i in 1..10 {
        dict.update(&patch_vector(&*seq.frame(i)?, &seq.groundtruth[i], side)?)?;
    }

    let i = 12;
    let frame = seq.frame(i)?;
    let stale = seq.groundtruth[i].with_size(seq.groundtruth[0].w, seq.groundtruth[0].h);
    let scales = [0.95, 1.0, 1.05];
    let cands = generate_candidates(&stale, &scales, &[-2.0, 0.0, 2.0])?;
    let pick = select_box(&frame, &cands, &dict, side)?;
    println!("truth  {:?}", seq.groundtruth[i]);
    println!("stale  {stale:?}");
    println!("picked {:?} (scale {}, shift {}, {})", pick.bbox, pick.scale, pick.dx, pick.dy);
    Ok(())
}
