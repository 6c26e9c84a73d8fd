use super::{hann_window, luminance, CnTable, Image, CN_CHANNELS};
use crate::error::{Error, Result};

/// `height x width x channels` real-valued stack stored as contiguous
/// row-major channel planes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn from_planes(height: usize, width: usize, planes: Vec<Vec<f64>>) -> Result<Self> {
        let cells = height * width;
        if cells == 0 || planes.is_empty() {
            return Err(Error::Shape("feature map must be non-empty".into()));
        }
        if let Some(p) = planes.iter().find(|p| p.len() != cells) {
            return Err(Error::Shape(format!(
                "plane of length {} for a {height}x{width} map",
                p.len()
            )));
        }
        let channels = planes.len();
        Ok(Self {
            height,
            width,
            channels,
            data: planes.concat(),
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn cells(&self) -> usize {
        self.height * self.width
    }

    pub fn same_shape(&self, other: &FeatureMap) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.cells();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.cells();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn planes(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cells())
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize, c: usize) -> f64 {
        self.data[c * self.cells() + row * self.width + col]
    }

    /// Feature vector of one cell across all channels.
    pub fn cell(&self, row: usize, col: usize) -> Vec<f64> {
        let idx = row * self.width + col;
        let n = self.cells();
        (0..self.channels).map(|c| self.data[c * n + idx]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Circular shift: output `(r, c)` takes input `(r - dy, c - dx)`.
    pub fn circular_shift(&self, dy: isize, dx: isize) -> Self {
        let (h, w) = (self.height as isize, self.width as isize);
        let mut out = Self::zeros(self.height, self.width, self.channels);
        for ch in 0..self.channels {
            let src = self.plane(ch);
            let dst = out.plane_mut(ch);
            for r in 0..h {
                let sr = (r - dy).rem_euclid(h);
                for c in 0..w {
                    let sc = (c - dx).rem_euclid(w);
                    dst[(r * w + c) as usize] = src[(sr * w + sc) as usize];
                }
            }
        }
        out
    }
}

/// Appearance stack for a patch: channel 0 is luminance scaled to
/// `[-0.5, 0.5]`, channels 1..=10 are mean-centered color-name
/// probabilities; every channel is tapered by a Hann window.
pub fn build_feature_map(patch: &Image, cn: &CnTable) -> FeatureMap {
    let (h, w) = (patch.height(), patch.width());
    let cells = h * w;
    let mut map = FeatureMap::zeros(h, w, 1 + CN_CHANNELS);

    for (v, &p) in map.plane_mut(0).iter_mut().zip(patch.pixels()) {
        *v = luminance(p) / 255.0 - 0.5;
    }
    {
        let data = map.as_mut_slice();
        for (i, &p) in patch.pixels().iter().enumerate() {
            let row = cn.lookup(p);
            for (k, &prob) in row.iter().enumerate() {
                data[(k + 1) * cells + i] = prob;
            }
        }
    }
    for c in 1..=CN_CHANNELS {
        let plane = map.plane_mut(c);
        let mean = plane.iter().sum::<f64>() / cells as f64;
        plane.iter_mut().for_each(|v| *v -= mean);
    }

    let window = hann_window(h, w);
    for c in 0..map.channels() {
        for (v, wv) in map.plane_mut(c).iter_mut().zip(&window) {
            *v *= wv;
        }
    }
    map
}
