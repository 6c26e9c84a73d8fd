//! Frames, boxes, patch geometry and the luminance + color-name appearance stack.

mod color_names;
mod features;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use color_names::{cn_index, CnTable, CN_CHANNELS, CN_ROWS};
pub use features::{build_feature_map, FeatureMap};

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image extent must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image extent must be positive");
        Self {
            width,
            height,
            pixels: vec![rgb; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        self.pixels[y * self.width + x] = rgb;
    }

    /// Pixel lookup with replicate-edge semantics for out-of-frame coordinates.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> [u8; 3] {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.get(x, y)
    }

    /// Per-pixel luminance in [0, 255], row-major.
    pub fn to_gray(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| luminance(p)).collect()
    }

    pub fn open(path: &Path) -> Result<Self> {
        let decoded = image::open(path).map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(Self::from(decoded.to_rgb8()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let buf = image::RgbImage::from(self.clone());
        buf.save(path).map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Decode {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
    }
}

impl From<image::RgbImage> for Image {
    fn from(buf: image::RgbImage) -> Self {
        let (w, h) = buf.dimensions();
        let pixels = buf.pixels().map(|p| p.0).collect();
        Self {
            width: w as usize,
            height: h as usize,
            pixels,
        }
    }
}

impl From<Image> for image::RgbImage {
    fn from(img: Image) -> Self {
        let raw: Vec<u8> = img.pixels.iter().flat_map(|p| p.iter().copied()).collect();
        image::RgbImage::from_raw(img.width as u32, img.height as u32, raw)
            .expect("buffer length matches extent")
    }
}

/// ITU-R BT.601 luma weights.
#[inline]
pub fn luminance(p: [u8; 3]) -> f64 {
    0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
}

/// Axis-aligned box in center convention. Pixel `i` covers `[i, i + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self { cx, cy, w, h }
    }

    pub fn from_top_left(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self::new(x + w / 2.0, y + h / 2.0, w, h)
    }

    /// `(x, y, w, h)` with `(x, y)` the top-left corner.
    pub fn top_left(&self) -> (f64, f64, f64, f64) {
        (self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.w, self.h)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_valid(&self) -> bool {
        self.cx.is_finite()
            && self.cy.is_finite()
            && self.w.is_finite()
            && self.h.is_finite()
            && self.w > 0.0
            && self.h > 0.0
    }

    pub fn with_size(&self, w: f64, h: f64) -> Self {
        Self::new(self.cx, self.cy, w, h)
    }

    /// Intersection of the box with the frame rectangle `[0, width] x [0, height]`.
    /// Returns `None` when nothing of the box remains.
    pub fn clip_to(&self, width: usize, height: usize) -> Option<Self> {
        let (x0, y0, w, h) = self.top_left();
        let x1 = (x0 + w).min(width as f64);
        let y1 = (y0 + h).min(height as f64);
        let x0 = x0.max(0.0);
        let y0 = y0.max(0.0);
        if x1 - x0 <= 0.0 || y1 - y0 <= 0.0 {
            return None;
        }
        Some(Self::from_top_left(x0, y0, x1 - x0, y1 - y0))
    }

    /// Integer pixel grid covered by the box: `(x0, y0, w, h)` after rounding.
    pub fn pixel_rect(&self) -> Result<(i64, i64, usize, usize)> {
        let w = self.w.round();
        let h = self.h.round();
        if !(w >= 1.0 && h >= 1.0) || !self.cx.is_finite() || !self.cy.is_finite() {
            return Err(Error::DegenerateBox(format!(
                "{}x{} rounds to an empty extent",
                self.w, self.h
            )));
        }
        let x0 = (self.cx - w / 2.0 + 0.5).floor() as i64;
        let y0 = (self.cy - h / 2.0 + 0.5).floor() as i64;
        Ok((x0, y0, w as usize, h as usize))
    }
}

/// Crop of size `round(w) x round(h)` centered on the box; out-of-frame pixels
/// replicate the nearest border pixel.
pub fn extract_patch(img: &Image, bbox: &BoundingBox) -> Result<Image> {
    let (x0, y0, w, h) = bbox.pixel_rect()?;
    let mut pixels = Vec::with_capacity(w * h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            pixels.push(img.get_clamped(x0 + x, y0 + y));
        }
    }
    Image::new(w, h, pixels)
}

/// Bilinear resample with pixel-center alignment; results rounded half away from zero.
pub fn resize_bilinear(img: &Image, out_w: usize, out_h: usize) -> Result<Image> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidArgument(format!(
            "resize target {out_w}x{out_h} is empty"
        )));
    }
    if out_w == img.width && out_h == img.height {
        return Ok(img.clone());
    }
    let xs = sample_axis(img.width, out_w);
    let ys = sample_axis(img.height, out_h);
    let mut pixels = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let p00 = img.get(x0, y0);
            let p01 = img.get(x1, y0);
            let p10 = img.get(x0, y1);
            let p11 = img.get(x1, y1);
            let mut out = [0u8; 3];
            for c in 0..3 {
                let top = p00[c] as f64 * (1.0 - fx) + p01[c] as f64 * fx;
                let bottom = p10[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                out[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            pixels.push(out);
        }
    }
    Image::new(out_w, out_h, pixels)
}

fn sample_axis(n_in: usize, n_out: usize) -> Vec<(usize, usize, f64)> {
    let ratio = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|i| {
            let src = ((i as f64 + 0.5) * ratio - 0.5).clamp(0.0, (n_in - 1) as f64);
            let lo = src.floor() as usize;
            let hi = (lo + 1).min(n_in - 1);
            (lo, hi, src - lo as f64)
        })
        .collect()
}

/// Symmetric Hann taper at index `k` of an `n`-point window; 1 when `n == 1`.
#[inline]
pub fn hann(k: usize, n: usize) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos())
}

/// Separable `h x w` Hann window, row-major.
pub fn hann_window(h: usize, w: usize) -> Vec<f64> {
    let rows: Vec<f64> = (0..h).map(|i| hann(i, h)).collect();
    let cols: Vec<f64> = (0..w).map(|j| hann(j, w)).collect();
    let mut out = Vec::with_capacity(h * w);
    for r in &rows {
        out.extend(cols.iter().map(|c| r * c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Image {
        let pixels = (0..w * h)
            .map(|i| [(i % 256) as u8, ((i * 7) % 256) as u8, ((i * 13) % 256) as u8])
            .collect();
        Image::new(w, h, pixels).unwrap()
    }

    #[test]
    fn patch_inside_is_exact_crop() {
        let img = ramp(20, 10);
        let patch = extract_patch(&img, &BoundingBox::from_top_left(3.0, 2.0, 5.0, 4.0)).unwrap();
        assert_eq!((patch.width(), patch.height()), (5, 4));
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(patch.get(x, y), img.get(x + 3, y + 2));
            }
        }
    }

    #[test]
    fn patch_at_origin_replicates_border() {
        let img = ramp(8, 8);
        let patch = extract_patch(&img, &BoundingBox::new(0.0, 0.0, 4.0, 4.0)).unwrap();
        // Top-left quadrant of the patch lies outside the frame.
        for y in 0..2 {
            for x in 0..2 {
                assert_eq!(patch.get(x, y), img.get(0, 0));
            }
        }
        assert_eq!(patch.get(3, 0), img.get(1, 0));
        assert_eq!(patch.get(0, 3), img.get(0, 1));
        assert_eq!(patch.get(3, 3), img.get(1, 1));
    }

    #[test]
    fn unit_patch_at_integer_center() {
        let img = ramp(8, 8);
        let patch = extract_patch(&img, &BoundingBox::new(5.0, 3.0, 1.0, 1.0)).unwrap();
        assert_eq!((patch.width(), patch.height()), (1, 1));
        assert_eq!(patch.get(0, 0), img.get(5, 3));
    }

    #[test]
    fn degenerate_patch_rejected() {
        let img = ramp(8, 8);
        let err = extract_patch(&img, &BoundingBox::new(4.0, 4.0, 0.4, 3.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateBox(_)));
    }

    #[test]
    fn patch_extraction_idempotent() {
        let img = ramp(30, 30);
        let b = BoundingBox::new(15.3, 12.7, 9.6, 7.2);
        let once = extract_patch(&img, &b).unwrap();
        let twice = extract_patch(&img, &b).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn resize_identity_and_constant() {
        let img = ramp(7, 5);
        assert_eq!(resize_bilinear(&img, 7, 5).unwrap(), img);
        let flat = Image::filled(2, 2, [40, 90, 200]);
        for (w, h) in [(1, 1), (3, 7), (16, 9)] {
            let r = resize_bilinear(&flat, w, h).unwrap();
            assert!(r.pixels().iter().all(|&p| p == [40, 90, 200]));
        }
    }

    #[test]
    fn resize_two_to_three_interpolates_midpoint() {
        // src x for outputs 0,1,2 = clamp(-1/6), 1/2, clamp(7/6) -> 0, 127.5, 255
        let img = Image::new(2, 1, vec![[0, 0, 0], [255, 255, 255]]).unwrap();
        let r = resize_bilinear(&img, 3, 1).unwrap();
        let v: Vec<u8> = r.pixels().iter().map(|p| p[0]).collect();
        assert_eq!(v, vec![0, 128, 255]);
    }

    #[test]
    fn hann_values() {
        let w = hann_window(5, 7);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[6], 0.0);
        assert_eq!(w[4 * 7], 0.0);
        assert_eq!(w[4 * 7 + 6], 0.0);
        assert!((w[2 * 7 + 3] - 1.0).abs() < 1e-15);
        assert!((hann(1, 4) - 0.75).abs() < 1e-15);
        assert_eq!(hann_window(1, 1), vec![1.0]);
    }

    #[test]
    fn hann_symmetric() {
        for (h, w) in [(4, 6), (5, 5), (9, 2)] {
            let win = hann_window(h, w);
            for i in 0..h {
                for j in 0..w {
                    let v = win[i * w + j];
                    assert!((v - win[(h - 1 - i) * w + j]).abs() < 1e-15);
                    assert!((v - win[i * w + (w - 1 - j)]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn clip_partially_outside() {
        let b = BoundingBox::from_top_left(-5.0, 10.0, 20.0, 10.0);
        let c = b.clip_to(100, 15).unwrap();
        assert_eq!(c.top_left(), (0.0, 10.0, 15.0, 5.0));
        assert!(BoundingBox::from_top_left(200.0, 0.0, 5.0, 5.0)
            .clip_to(100, 100)
            .is_none());
    }
}
