//! Bounding-box adaptation by minimal sparse-reconstruction error.

mod dictionary;

use image::imageops::{self, FilterType};
use image::{ImageBuffer, Luma};
use nalgebra::DVector;
use rayon::prelude::*;

pub use dictionary::{init_dictionary, soft_threshold, Dictionary};

use crate::error::{Error, Result};
use crate::imaging::{extract_patch, BoundingBox, Image};

/// Reconstruction errors closer than this count as ties.
const TIE_EPS: f64 = 1e-9;

/// Per-entry RMS (on a [0, 1] gray scale) below which a crop counts as flat.
const FLAT_RMS: f64 = 1e-5;

/// Error assigned to constant crops, which map to the zero vector.
const FEATURELESS_ERROR: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleConfig {
    pub patch_side: usize,
    pub atoms: usize,
    pub max_iters: usize,
    pub sparsity: f64,
    pub scales: Vec<f64>,
    pub shifts: Vec<f64>,
    /// weight of the previous extent when accepting a new one
    pub damping: f64,
    pub rng_seed: u64,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self {
            patch_side: 16,
            atoms: 250,
            max_iters: 200,
            sparsity: 0.05,
            scales: vec![0.95, 1.0, 1.05],
            shifts: vec![-2.0, 0.0, 2.0],
            damping: 0.6,
            rng_seed: 0,
        }
    }
}

/// Grayscale crop resized to `side x side`, flattened row-major, mean
/// removed and scaled to unit norm. A constant crop maps to zero.
pub fn patch_vector(frame: &Image, bbox: &BoundingBox, side: usize) -> Result<DVector<f64>> {
    if side == 0 {
        return Err(Error::InvalidArgument("patch side must be positive".into()));
    }
    let patch = extract_patch(frame, bbox)?;
    // Filtered downsampling: point-sampling a crop several times larger than
    // the patch maps neighbouring scales onto the same pixels.
    // float buffers are clamped to [0, 1] by the resampler
    let gray: Vec<f32> = patch.to_gray().iter().map(|&g| (g / 255.0) as f32).collect();
    let gray = ImageBuffer::<Luma<f32>, _>::from_raw(patch.width() as u32, patch.height() as u32, gray)
        .expect("buffer matches crop size");
    let small = imageops::resize(&gray, side as u32, side as u32, FilterType::Triangle);
    let gray: Vec<f64> = small.into_raw().into_iter().map(f64::from).collect();
    let mean = gray.iter().sum::<f64>() / gray.len() as f64;
    let mut v = DVector::from_iterator(gray.len(), gray.iter().map(|g| g - mean));
    // resampling runs in f32, so flat crops leave rounding residue well
    // below a single gray level
    let n = v.norm();
    if n > FLAT_RMS * (v.len() as f64).sqrt() {
        v /= n;
    } else {
        v.fill(0.0);
    }
    Ok(v)
}

/// One candidate box and the perturbation that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub bbox: BoundingBox,
    pub scale: f64,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    pub scales: Vec<f64>,
    pub shifts: Vec<f64>,
}

impl CandidateSet {
    pub fn boxes(&self) -> impl Iterator<Item = BoundingBox> + '_ {
        self.candidates.iter().map(|c| c.bbox)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Every `scale x dx x dy` combination: size scaled about the center, then
/// the center shifted.
pub fn generate_candidates(bbox: &BoundingBox, scales: &[f64], shifts: &[f64]) -> Result<CandidateSet> {
    if !scales.contains(&1.0) {
        return Err(Error::InvalidArgument("candidate scales must include 1.0".into()));
    }
    if !shifts.contains(&0.0) {
        return Err(Error::InvalidArgument("candidate shifts must include 0".into()));
    }
    if scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidArgument("candidate scales must be positive".into()));
    }
    let mut candidates = Vec::with_capacity(scales.len() * shifts.len() * shifts.len());
    for &scale in scales {
        for &dx in shifts {
            for &dy in shifts {
                candidates.push(Candidate {
                    bbox: BoundingBox::new(bbox.cx + dx, bbox.cy + dy, bbox.w * scale, bbox.h * scale),
                    scale,
                    dx,
                    dy,
                });
            }
        }
    }
    Ok(CandidateSet {
        candidates,
        scales: scales.to_vec(),
        shifts: shifts.to_vec(),
    })
}

/// Candidate with the smallest reconstruction error under `dict`. Constant
/// crops score [`FEATURELESS_ERROR`] rather than a perfect zero. Near-ties
/// prefer the scale closest to 1, then the smallest shift, then the earlier
/// candidate.
pub fn select_box(
    frame: &Image,
    cands: &CandidateSet,
    dict: &Dictionary,
    side: usize,
) -> Result<Candidate> {
    match cands.candidates.as_slice() {
        [] => return Err(Error::InvalidArgument("no candidates".into())),
        [only] => return Ok(*only),
        _ => {}
    }
    let errors: Vec<f64> = cands
        .candidates
        .par_iter()
        .map(|c| {
            let x = patch_vector(frame, &c.bbox, side)?;
            if x.iter().all(|&v| v == 0.0) {
                // a featureless crop carries no evidence; score it like a
                // unit patch that nothing reconstructs
                return Ok(FEATURELESS_ERROR);
            }
            dict.reconstruction_error(&x)
        })
        .collect::<Result<_>>()?;
    let best = errors.iter().copied().fold(f64::INFINITY, f64::min);
    let pick = (0..errors.len())
        .filter(|&i| errors[i] <= best + TIE_EPS)
        .min_by(|&a, &b| {
            let (ca, cb) = (&cands.candidates[a], &cands.candidates[b]);
            (ca.scale - 1.0)
                .abs()
                .total_cmp(&(cb.scale - 1.0).abs())
                .then(ca.dx.hypot(ca.dy).total_cmp(&cb.dx.hypot(cb.dy)))
                .then(a.cmp(&b))
        })
        .expect("at least one candidate attains the minimum");
    Ok(cands.candidates[pick])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn textured_frame(w: usize, h: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut img = Image::filled(w, h, [90, 110, 100]);
        for y in 0..h {
            for x in 0..w {
                let v: u8 = rng.random_range(60..200);
                img.set(x, y, [v, v / 2 + 40, 255 - v]);
            }
        }
        img
    }

    #[test]
    fn patch_vector_rules() {
        let frame = textured_frame(40, 40, 1);
        let b = BoundingBox::new(20.0, 20.0, 12.0, 10.0);
        let v = patch_vector(&frame, &b, 16).unwrap();
        assert_eq!(v.len(), 256);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert_eq!(v, patch_vector(&frame, &b, 16).unwrap());
        let flat = Image::filled(40, 40, [10, 200, 30]);
        assert!(patch_vector(&flat, &b, 16).unwrap().iter().all(|&x| x == 0.0));
        assert!(patch_vector(&frame, &BoundingBox::new(5.0, 5.0, 0.2, 4.0), 16).is_err());
    }

    #[test]
    fn candidate_grid() {
        let b = BoundingBox::new(50.0, 50.0, 20.0, 20.0);
        let set = generate_candidates(&b, &[0.95, 1.0, 1.05], &[-2.0, 0.0, 2.0]).unwrap();
        assert_eq!(set.len(), 27);
        assert!(set.boxes().any(|c| c == b));
        let one = generate_candidates(&b, &[1.0], &[0.0]).unwrap();
        assert_eq!(one.boxes().collect::<Vec<_>>(), vec![b]);
        let big = generate_candidates(&b, &[1.0, 1.05], &[0.0]).unwrap();
        assert_eq!(big.candidates[1].bbox, BoundingBox::new(50.0, 50.0, 21.0, 21.0));
        assert!(generate_candidates(&b, &[0.9], &[0.0]).is_err());
        assert!(generate_candidates(&b, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn singleton_and_uniform_ties() {
        let b = BoundingBox::new(20.0, 20.0, 10.0, 10.0);
        let frame = Image::filled(40, 40, [128, 128, 128]);
        let dict = init_dictionary(&[DVector::from_element(256, 1.0 / 16.0)], 20, 0, 0.05, 10).unwrap();
        let one = generate_candidates(&b, &[1.0], &[0.0]).unwrap();
        assert_eq!(select_box(&frame, &one, &dict, 16).unwrap().bbox, b);
        let all = generate_candidates(&b, &[0.95, 1.0, 1.05], &[-2.0, 0.0, 2.0]).unwrap();
        let pick = select_box(&frame, &all, &dict, 16).unwrap();
        assert_eq!((pick.scale, pick.dx, pick.dy), (1.0, 0.0, 0.0));
    }

    #[test]
    fn trained_dictionary_prefers_current_box() {
        let frame = textured_frame(80, 80, 3);
        let b = BoundingBox::new(40.0, 40.0, 20.0, 20.0);
        let x = patch_vector(&frame, &b, 16).unwrap();
        let mut dict = init_dictionary(std::slice::from_ref(&x), 60, 2, 0.05, 200).unwrap();
        for _ in 0..20 {
            dict.update(&x).unwrap();
        }
        let cands = generate_candidates(&b, &[0.95, 1.0, 1.05], &[-2.0, 0.0, 2.0]).unwrap();
        let pick = select_box(&frame, &cands, &dict, 16).unwrap();
        assert_eq!(pick.bbox, b);
    }
}
