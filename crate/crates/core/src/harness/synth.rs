//! Deterministic synthetic sequences with exact ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sequence::{Frames, Sequence};
use crate::error::{Error, Result};
use crate::imaging::{luminance, BoundingBox, Image};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    Uniform { color: [u8; 3] },
    /// Random color blocks of `block` pixels, smoothed by a small box blur.
    Textured { seed: u64, block: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetPattern {
    Solid,
    /// `cells x cells` checkerboard in target-relative coordinates, so it
    /// scales with the target.
    Checker { secondary: [u8; 3], cells: usize },
}

/// A second rectangle drawn under the target. Without a velocity it moves
/// rigidly with the target; with one it starts at the offset and moves on
/// its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distractor {
    pub color: [u8; 3],
    /// center offset from the (initial) target center, pixels
    pub offset: [f64; 2],
    pub size: [f64; 2],
    /// independent motion in pixels/frame; `[0, 0]` keeps it static
    #[serde(default)]
    pub velocity: Option<[f64; 2]>,
}

impl Distractor {
    /// Distractor box in frame `i` of `spec`.
    pub fn box_at(&self, spec: &SynthSpec, i: usize) -> BoundingBox {
        let anchor = match self.velocity {
            None => spec.box_at(i),
            Some(v) => {
                let b = spec.box_at(0);
                BoundingBox::new(b.cx + v[0] * i as f64, b.cy + v[1] * i as f64, b.w, b.h)
            }
        };
        BoundingBox::new(anchor.cx + self.offset[0], anchor.cy + self.offset[1], self.size[0], self.size[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub background: Background,
    pub target_color: [u8; 3],
    pub target_pattern: TargetPattern,
    pub target_size: [f64; 2],
    /// initial target center; frame center when absent
    pub start: Option<[f64; 2]>,
    /// pixels per frame
    pub velocity: [f64; 2],
    /// per-frame relative growth of the target side, e.g. 0.01
    pub scale_rate: f64,
    /// per-frame additive brightness change, in gray levels
    pub illumination_ramp: f64,
    pub distractor: Option<Distractor>,
    /// amplitude of uniform per-pixel noise in gray levels, 0 disables
    pub noise: f64,
    pub noise_seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            name: "synthetic".into(),
            width: 320,
            height: 240,
            frames: 60,
            background: Background::Textured { seed: 7, block: 6 },
            target_color: [220, 40, 40],
            target_pattern: TargetPattern::Checker {
                secondary: [250, 220, 30],
                cells: 4,
            },
            target_size: [40.0, 40.0],
            start: None,
            velocity: [0.0, 0.0],
            scale_rate: 0.0,
            illumination_ramp: 0.0,
            distractor: None,
            noise: 0.0,
            noise_seed: 0,
        }
    }
}

impl SynthSpec {
    /// Ground-truth box of frame `i` (0-based): side scale `(1 + rate)^i`,
    /// center `start + i * velocity`.
    pub fn box_at(&self, i: usize) -> BoundingBox {
        let [sx, sy] = self.start.unwrap_or([self.width as f64 / 2.0, self.height as f64 / 2.0]);
        let s = (1.0 + self.scale_rate).powi(i as i32);
        BoundingBox::new(
            sx + self.velocity[0] * i as f64,
            sy + self.velocity[1] * i as f64,
            self.target_size[0] * s,
            self.target_size[1] * s,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("synthetic frame extent must be positive".into()));
        }
        if self.frames < 2 {
            return Err(Error::InvalidArgument("synthetic sequence needs at least 2 frames".into()));
        }
        if !(self.target_size[0] >= 1.0 && self.target_size[1] >= 1.0) {
            return Err(Error::InvalidArgument("target must be at least 1x1 pixel".into()));
        }
        if let TargetPattern::Checker { cells: 0, .. } = self.target_pattern {
            return Err(Error::InvalidArgument("checker needs at least one cell".into()));
        }
        if let Background::Textured { block: 0, .. } = self.background {
            return Err(Error::InvalidArgument("texture block must be positive".into()));
        }
        for i in 0..self.frames {
            let b = self.box_at(i);
            let inside = b.clip_to(self.width, self.height).map_or(0.0, |c| c.area());
            if inside < 0.5 * b.area() {
                return Err(Error::InvalidArgument(format!(
                    "target less than 50% inside the frame at frame {i}"
                )));
            }
        }
        Ok(())
    }
}

/// Color with (nearly) the luminance of `reference`, built by moving weight
/// from red to green. Useful for hue-only distractors.
pub fn same_luminance_color(reference: [u8; 3]) -> [u8; 3] {
    let target = luminance(reference);
    let b = reference[2];
    let mut best = [0, 0, b];
    let mut best_err = f64::INFINITY;
    for r in 0..=255u8 {
        // solve 0.299 r + 0.587 g + 0.114 b = target for g
        let g = ((target - 0.299 * r as f64 - 0.114 * b as f64) / 0.587).round();
        if !(0.0..=255.0).contains(&g) {
            continue;
        }
        let cand = [r, g as u8, b];
        let err = (luminance(cand) - target).abs() - 1e-3 * (g - r as f64);
        if err < best_err && (g as u8) > r {
            best_err = err;
            best = cand;
        }
    }
    best
}

fn render_background(spec: &SynthSpec) -> Image {
    match &spec.background {
        Background::Uniform { color } => Image::filled(spec.width, spec.height, *color),
        Background::Textured { seed, block } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let bw = spec.width / block + 1;
            let bh = spec.height / block + 1;
            let blocks: Vec<[f64; 3]> = (0..bw * bh)
                .map(|_| {
                    [
                        rng.random_range(30.0..210.0),
                        rng.random_range(30.0..210.0),
                        rng.random_range(30.0..210.0),
                    ]
                })
                .collect();
            let mut raw = vec![[0.0f64; 3]; spec.width * spec.height];
            for y in 0..spec.height {
                for x in 0..spec.width {
                    raw[y * spec.width + x] = blocks[(y / block) * bw + x / block];
                }
            }
            // 3x3 box blur softens block edges
            let mut img = Image::filled(spec.width, spec.height, [0, 0, 0]);
            for y in 0..spec.height {
                for x in 0..spec.width {
                    let mut acc = [0.0; 3];
                    let mut n = 0.0;
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let xx = (x as i64 + dx).clamp(0, spec.width as i64 - 1) as usize;
                            let yy = (y as i64 + dy).clamp(0, spec.height as i64 - 1) as usize;
                            let p = raw[yy * spec.width + xx];
                            for c in 0..3 {
                                acc[c] += p[c];
                            }
                            n += 1.0;
                        }
                    }
                    img.set(x, y, acc.map(|v| (v / n).round() as u8));
                }
            }
            img
        }
    }
}

fn fill_rect(img: &mut Image, bbox: &BoundingBox, mut color_at: impl FnMut(f64, f64) -> [u8; 3]) {
    let (x0, y0, w, h) = bbox.top_left();
    let xa = x0.floor().max(0.0) as usize;
    let ya = y0.floor().max(0.0) as usize;
    let xb = ((x0 + w).ceil().max(0.0) as usize).min(img.width());
    let yb = ((y0 + h).ceil().max(0.0) as usize).min(img.height());
    for y in ya..yb {
        let fy = y as f64 + 0.5;
        if fy < y0 || fy >= y0 + h {
            continue;
        }
        for x in xa..xb {
            let fx = x as f64 + 0.5;
            if fx < x0 || fx >= x0 + w {
                continue;
            }
            img.set(x, y, color_at((fx - x0) / w, (fy - y0) / h));
        }
    }
}

/// Renders `spec` into an in-memory sequence.
pub fn synth_sequence(spec: &SynthSpec) -> Result<Sequence> {
    spec.validate()?;
    let background = render_background(spec);
    let mut frames = Vec::with_capacity(spec.frames);
    let mut groundtruth = Vec::with_capacity(spec.frames);
    for i in 0..spec.frames {
        let mut img = background.clone();
        let gt = spec.box_at(i);
        if let Some(d) = &spec.distractor {
            fill_rect(&mut img, &d.box_at(spec, i), |_, _| d.color);
        }
        fill_rect(&mut img, &gt, |u, v| match &spec.target_pattern {
            TargetPattern::Solid => spec.target_color,
            TargetPattern::Checker { secondary, cells } => {
                let cu = (u * *cells as f64).floor() as usize;
                let cv = (v * *cells as f64).floor() as usize;
                if (cu + cv).is_multiple_of(2) {
                    spec.target_color
                } else {
                    *secondary
                }
            }
        });
        let shift = spec.illumination_ramp * i as f64;
        if shift != 0.0 || spec.noise > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.noise_seed.wrapping_add(i as u64));
            for y in 0..img.height() {
                for x in 0..img.width() {
                    let n = if spec.noise > 0.0 {
                        rng.random_range(-spec.noise..=spec.noise)
                    } else {
                        0.0
                    };
                    let p = img.get(x, y);
                    img.set(x, y, p.map(|c| (c as f64 + shift + n).round().clamp(0.0, 255.0) as u8));
                }
            }
        }
        frames.push(img);
        groundtruth.push(gt);
    }
    Sequence::new(spec.name.clone(), Frames::Memory(frames), groundtruth)
}
