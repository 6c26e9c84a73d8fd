use std::fs;
use std::path::Path;

use super::runner::RunResult;
use super::sequence::Sequence;
use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, Image};

pub const PREDICTION_COLOR: [u8; 3] = [0, 255, 0];
pub const GROUNDTRUTH_COLOR: [u8; 3] = [255, 0, 255];

/// Draws the outline of `bbox` with the given stroke width, clipped to the image.
pub fn draw_rect(img: &mut Image, bbox: &BoundingBox, color: [u8; 3], thickness: usize) {
    let Ok((x0, y0, w, h)) = bbox.pixel_rect() else {
        return;
    };
    let (x1, y1) = (x0 + w as i64 - 1, y0 + h as i64 - 1);
    let t = thickness as i64;
    let (iw, ih) = (img.width() as i64, img.height() as i64);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let edge = x - x0 < t || x1 - x < t || y - y0 < t || y1 - y < t;
            if edge && (0..iw).contains(&x) && (0..ih).contains(&y) {
                img.set(x as usize, y as usize, color);
            }
        }
    }
}

/// Writes every frame with ground truth and prediction outlined (2 px) as
/// `out_dir/NNNNNNNN.png`.
pub fn render_overlay(seq: &Sequence, result: &RunResult, out_dir: &Path) -> Result<()> {
    if result.boxes.len() != seq.len() {
        return Err(Error::Sequence("result length differs from sequence".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for i in 0..seq.len() {
        let mut img = seq.frame(i)?.into_owned();
        if seq.groundtruth[i].is_valid() {
            draw_rect(&mut img, &seq.groundtruth[i], GROUNDTRUTH_COLOR, 2);
        }
        draw_rect(&mut img, &result.boxes[i], PREDICTION_COLOR, 2);
        img.save(&out_dir.join(format!("{:08}.png", i + 1)))?;
    }
    Ok(())
}
