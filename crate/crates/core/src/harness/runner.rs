use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, iou, MetricsReport};
use super::sequence::Sequence;
use crate::cft::{Tracker, TrackerConfig};
use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, CnTable};

#[derive(Debug, Clone)]
pub struct RunResult {
    pub boxes: Vec<BoundingBox>,
    /// `None` where the ground truth is not a valid box
    pub per_frame_iou: Vec<Option<f64>>,
    /// tracker-only frames per second over frames 2..N
    pub fps: f64,
    /// including frame decoding
    pub fps_end_to_end: f64,
    pub config_snapshot: TrackerConfig,
}

impl RunResult {
    pub fn metrics(&self, groundtruth: &[BoundingBox]) -> Result<MetricsReport> {
        evaluate(&self.boxes, groundtruth)
    }
}

/// Serialized run summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub sequence: String,
    pub frames: usize,
    pub mean_iou: f64,
    pub precision_20: f64,
    pub failures: usize,
    pub fps: f64,
    pub fps_end_to_end: f64,
    pub config: TrackerConfig,
}

impl RunReport {
    pub fn new(seq: &Sequence, result: &RunResult) -> Result<Self> {
        let m = result.metrics(&seq.groundtruth)?;
        Ok(Self {
            sequence: seq.name.clone(),
            frames: seq.len(),
            mean_iou: m.mean_iou,
            precision_20: m.precision_20,
            failures: m.failures,
            fps: result.fps,
            fps_end_to_end: result.fps_end_to_end,
            config: result.config_snapshot.clone(),
        })
    }
}

/// One-pass run: init on the first annotated box, then track every
/// remaining frame without re-initialization.
pub fn run_tracker(seq: &Sequence, cfg: &TrackerConfig, cn: Arc<CnTable>) -> Result<RunResult> {
    run_tracker_observed(seq, cfg, cn, |_, _| Ok(()))
}

/// [`run_tracker`] with a callback after init (frame 0) and after every step.
pub fn run_tracker_observed(
    seq: &Sequence,
    cfg: &TrackerConfig,
    cn: Arc<CnTable>,
    mut observe: impl FnMut(usize, &Tracker) -> Result<()>,
) -> Result<RunResult> {
    let first = seq.frame(0).map_err(|e| frame_error(0, e))?;
    let mut tracker = Tracker::init(&first, seq.initial_box(), cfg.clone(), cn)?;
    drop(first);
    observe(0, &tracker)?;

    let mut boxes = Vec::with_capacity(seq.len());
    boxes.push(tracker.position());
    let mut tracking = Duration::ZERO;
    let loop_start = Instant::now();
    for i in 1..seq.len() {
        let frame = seq.frame(i).map_err(|e| frame_error(i, e))?;
        let t0 = Instant::now();
        let b = tracker.step(&frame)?;
        tracking += t0.elapsed();
        boxes.push(b);
        observe(i, &tracker)?;
    }
    let end_to_end = loop_start.elapsed();

    let steps = (seq.len() - 1) as f64;
    let per_frame_iou = boxes
        .iter()
        .zip(&seq.groundtruth)
        .map(|(p, g)| g.is_valid().then(|| iou(p, g)))
        .collect();
    Ok(RunResult {
        boxes,
        per_frame_iou,
        fps: steps / tracking.as_secs_f64().max(1e-9),
        fps_end_to_end: steps / end_to_end.as_secs_f64().max(1e-9),
        config_snapshot: cfg.clone(),
    })
}

fn frame_error(index: usize, e: Error) -> Error {
    match e {
        Error::Decode { path, message } => Error::Decode {
            path,
            message: format!("frame {}: {message}", index + 1),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{synth_sequence, SynthSpec};

    #[test]
    fn first_box_is_groundtruth_and_runs_repeat() {
        let spec = SynthSpec {
            frames: 6,
            velocity: [2.0, 1.0],
            ..Default::default()
        };
        let seq = synth_sequence(&spec).unwrap();
        let cn = Arc::new(CnTable::prototype());
        let cfg = TrackerConfig::default();
        let a = run_tracker(&seq, &cfg, cn.clone()).unwrap();
        let b = run_tracker(&seq, &cfg, cn).unwrap();
        assert_eq!(a.boxes[0], seq.groundtruth[0]);
        assert_eq!(a.boxes, b.boxes);
        assert_eq!(a.boxes.len(), 6);
        assert_eq!(a.per_frame_iou.len(), 6);
        assert!(a.fps > 0.0);
    }

    #[test]
    fn decode_failure_names_frame() {
        let dir = tempfile::tempdir().unwrap();
        crate::imaging::Image::filled(40, 40, [1, 2, 3])
            .save(&dir.path().join("00000001.png"))
            .unwrap();
        std::fs::write(dir.path().join("00000002.png"), b"not a png").unwrap();
        std::fs::write(dir.path().join("groundtruth.txt"), "10,10,10,10\n10,10,10,10\n").unwrap();
        let seq = crate::harness::load_sequence(dir.path()).unwrap();
        let err = run_tracker(&seq, &TrackerConfig::default(), Arc::new(CnTable::prototype())).unwrap_err();
        assert!(err.to_string().contains("frame 2"), "{err}");
    }
}
