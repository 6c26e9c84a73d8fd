//! Tracks a sequence directory frame by frame and prints each box with
//! the channels selected for it.
//!
//!     cargo run --release --example run_sequence -- path/to/sequence
//!
//! Without an argument a synthetic sequence is used.

use std::path::Path;
use std::sync::Arc;

use dfst::harness::{load_sequence, synth_sequence, SynthSpec};
use dfst::{CnTable, Tracker, TrackerConfig};

fn main() -> dfst::Result<()> {
    let seq = match std::env::args().nth(1) {
        Some(dir) => load_sequence(Path::new(&dir))?,
        None => synth_sequence(&SynthSpec { velocity: [2.0, 1.0], frames: 20, ..Default::default() })?,
    };
    let mut tracker = Tracker::init(
        &*seq.frame(0)?,
        seq.initial_box(),
        TrackerConfig::default(),
        Arc::new(CnTable::prototype()),
    )?;
    for i in 1..seq.len() {
        let b = tracker.step(&*seq.frame(i)?)?;
        println!("{i:4}  ({:7.2}, {:7.2})  {:5.1} x {:5.1}  channels {:?}", b.cx, b.cy, b.w, b.h, tracker.selected());
    }
    Ok(())
}
