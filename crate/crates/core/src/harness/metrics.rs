use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::BoundingBox;

/// Center-error threshold for the precision score.
pub const PRECISION_THRESHOLD_PX: f64 = 20.0;

/// Intersection over union of two axis-aligned boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax, ay, aw, ah) = a.top_left();
    let (bx, by, bw, bh) = b.top_left();
    let iw = ((ax + aw).min(bx + bw) - ax.max(bx)).max(0.0);
    let ih = ((ay + ah).min(by + bh) - ay.max(by)).max(0.0);
    let inter = iw * ih;
    let union = aw * ah + bw * bh - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

pub fn center_error(a: &BoundingBox, b: &BoundingBox) -> f64 {
    (a.cx - b.cx).hypot(a.cy - b.cy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// mean overlap over frames 2..N with valid ground truth
    pub mean_iou: f64,
    /// fraction of those frames with center error below 20 px
    pub precision_20: f64,
    /// frames with zero overlap
    pub failures: usize,
    pub frames_evaluated: usize,
}

/// Scores predictions against ground truth, skipping the initialization
/// frame and frames whose annotation is not a valid box.
pub fn evaluate(predicted: &[BoundingBox], groundtruth: &[BoundingBox]) -> Result<MetricsReport> {
    if predicted.len() != groundtruth.len() {
        return Err(Error::Sequence(format!(
            "count mismatch: {} predictions, {} ground-truth boxes",
            predicted.len(),
            groundtruth.len()
        )));
    }
    let mut sum_iou = 0.0;
    let mut within = 0usize;
    let mut failures = 0usize;
    let mut n = 0usize;
    for (p, g) in predicted.iter().zip(groundtruth).skip(1) {
        if !g.is_valid() {
            continue;
        }
        let o = iou(p, g);
        sum_iou += o;
        if o == 0.0 {
            failures += 1;
        }
        if center_error(p, g) < PRECISION_THRESHOLD_PX {
            within += 1;
        }
        n += 1;
    }
    let denom = n.max(1) as f64;
    Ok(MetricsReport {
        mean_iou: sum_iou / denom,
        precision_20: within as f64 / denom,
        failures,
        frames_evaluated: n,
    })
}
