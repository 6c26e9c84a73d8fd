use rustfft::num_complex::Complex64;

use super::fourier::{Fft2, Spectrum};
use crate::error::{Error, Result};
use crate::imaging::FeatureMap;

/// Regression target: Gaussian bump of height 1 at cell `(h/2, w/2)` with
/// circular distances and `σ = factor * sqrt(target_h * target_w)`.
pub fn gaussian_label(h: usize, w: usize, target_h: f64, target_w: f64, factor: f64) -> Vec<f64> {
    let sigma = label_sigma(target_h, target_w, factor);
    let (ch, cw) = (h / 2, w / 2);
    let inv = if sigma > 0.0 { 1.0 / (2.0 * sigma * sigma) } else { f64::INFINITY };
    let mut y = Vec::with_capacity(h * w);
    for i in 0..h {
        let di = circular_distance(i, ch, h);
        for j in 0..w {
            let dj = circular_distance(j, cw, w);
            let d2 = di * di + dj * dj;
            y.push(if d2 == 0.0 { 1.0 } else { (-d2 * inv).exp() });
        }
    }
    y
}

pub fn label_sigma(target_h: f64, target_w: f64, factor: f64) -> f64 {
    factor * (target_h * target_w).sqrt()
}

fn circular_distance(i: usize, center: usize, n: usize) -> f64 {
    let d = i.abs_diff(center);
    d.min(n - d) as f64
}

/// Gaussian kernel between `x` and every cyclic shift of `z`:
/// `k(τ) = exp(−max(0, ‖x‖² + ‖z‖² − 2 Σ_c (x_c ⋆ z_c)(τ)) / (σ² H W C))`.
pub fn gaussian_kernel_correlation(
    fft: &Fft2,
    x: &FeatureMap,
    z: &FeatureMap,
    sigma: f64,
) -> Result<Vec<f64>> {
    if !x.same_shape(z) {
        return Err(Error::Shape(format!(
            "kernel operands {}x{}x{} and {}x{}x{}",
            x.height(),
            x.width(),
            x.channels(),
            z.height(),
            z.width(),
            z.channels()
        )));
    }
    if fft.shape() != (x.height(), x.width()) {
        return Err(Error::Shape("transform plan extent differs from map".into()));
    }
    let (h, w) = (x.height(), x.width());
    let xx: f64 = x.as_slice().iter().map(|v| v * v).sum();
    let zz: f64 = z.as_slice().iter().map(|v| v * v).sum();

    let mut cross = Spectrum::zeros(h, w);
    for (xp, zp) in x.planes().zip(z.planes()) {
        let xf = fft.forward_real(xp);
        let zf = fft.forward_real(zp);
        for ((acc, a), b) in cross.data.iter_mut().zip(&xf.data).zip(&zf.data) {
            *acc += a.conj() * b;
        }
    }
    fft.inverse_in_place(&mut cross);

    let norm = sigma * sigma * x.as_slice().len() as f64;
    Ok(cross
        .data
        .iter()
        .map(|c| (-(xx + zz - 2.0 * c.re).max(0.0) / norm).exp())
        .collect())
}

/// Ridge solution in the Fourier domain, `α̂ = ŷ / (k̂ˣˣ + λ)`.
pub fn train(
    fft: &Fft2,
    features: &FeatureMap,
    label_hat: &Spectrum,
    sigma: f64,
    lambda_reg: f64,
) -> Result<Spectrum> {
    if (label_hat.h, label_hat.w) != (features.height(), features.width()) {
        return Err(Error::Shape("label extent differs from feature map".into()));
    }
    let kxx = gaussian_kernel_correlation(fft, features, features, sigma)?;
    let kf = fft.forward_real(&kxx);
    let data = label_hat
        .data
        .iter()
        .zip(&kf.data)
        .map(|(y, k)| y / (k + Complex64::new(lambda_reg, 0.0)))
        .collect();
    Ok(Spectrum {
        h: label_hat.h,
        w: label_hat.w,
        data,
    })
}

/// Detection scores over all cyclic shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    pub h: usize,
    pub w: usize,
    pub values: Vec<f64>,
    /// argmax, ties to the smallest row then column
    pub peak: (usize, usize),
    pub subcell_offset: (f64, f64),
}

impl ResponseMap {
    pub fn new(h: usize, w: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), h * w);
        let mut best = 0;
        for (i, &v) in values.iter().enumerate() {
            if v > values[best] {
                best = i;
            }
        }
        Self {
            h,
            w,
            values,
            peak: (best / w, best % w),
            subcell_offset: (0.0, 0.0),
        }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.w + c]
    }

    pub fn max(&self) -> f64 {
        self.at(self.peak.0, self.peak.1)
    }

    /// Integer peak displacement relative to the label center, unwrapped to
    /// `(-n/2, n/2]` on each axis.
    pub fn displacement(&self) -> (isize, isize) {
        (
            unwrap(self.peak.0, self.h / 2, self.h),
            unwrap(self.peak.1, self.w / 2, self.w),
        )
    }

    /// Displacement including the sub-cell refinement.
    pub fn refined_displacement(&self) -> (f64, f64) {
        let (dy, dx) = self.displacement();
        (dy as f64 + self.subcell_offset.0, dx as f64 + self.subcell_offset.1)
    }
}

fn unwrap(peak: usize, center: usize, n: usize) -> isize {
    let n = n as isize;
    let mut d = peak as isize - center as isize;
    if d > n / 2 {
        d -= n;
    } else if d <= -(n + 1) / 2 {
        d += n;
    }
    d
}

/// Response of the filter `α̂` learned on `model` evaluated on `features`.
pub fn detect(
    fft: &Fft2,
    alpha_hat: &Spectrum,
    model: &FeatureMap,
    features: &FeatureMap,
    sigma: f64,
) -> Result<ResponseMap> {
    if (alpha_hat.h, alpha_hat.w) != (model.height(), model.width()) {
        return Err(Error::Shape("filter extent differs from model appearance".into()));
    }
    let kxz = gaussian_kernel_correlation(fft, model, features, sigma)?;
    let mut kf = fft.forward_real(&kxz);
    for (k, a) in kf.data.iter_mut().zip(&alpha_hat.data) {
        *k *= a;
    }
    fft.inverse_in_place(&mut kf);
    Ok(ResponseMap::new(alpha_hat.h, alpha_hat.w, kf.real()))
}

/// Vertex offset of the parabola through `(−1, r_minus), (0, r0), (1, r_plus)`,
/// clamped to `[−0.5, 0.5]`; 0 when the curvature vanishes.
pub fn parabolic_offset(r_minus: f64, r0: f64, r_plus: f64) -> f64 {
    let den = 2.0 * (r_minus - 2.0 * r0 + r_plus);
    if den == 0.0 || !den.is_finite() {
        return 0.0;
    }
    ((r_minus - r_plus) / den).clamp(-0.5, 0.5)
}

/// Separable quadratic refinement of the response peak. Axes where the peak
/// sits on the map border get no offset.
pub fn micro_shift(resp: &ResponseMap) -> (f64, f64) {
    let (r, c) = resp.peak;
    let r0 = resp.at(r, c);
    let dy = if r > 0 && r + 1 < resp.h {
        parabolic_offset(resp.at(r - 1, c), r0, resp.at(r + 1, c))
    } else {
        0.0
    };
    let dx = if c > 0 && c + 1 < resp.w {
        parabolic_offset(resp.at(r, c - 1), r0, resp.at(r, c + 1))
    } else {
        0.0
    };
    (dy, dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_map(h: usize, w: usize, c: usize, seed: u64) -> FeatureMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planes = (0..c)
            .map(|_| (0..h * w).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        FeatureMap::from_planes(h, w, planes).unwrap()
    }

    #[test]
    fn label_properties() {
        let y = gaussian_label(9, 12, 10.0, 10.0, 0.1);
        assert_eq!(y[4 * 12 + 6], 1.0);
        assert_eq!(label_sigma(10.0, 10.0, 0.1), 1.0);
        for d in 1..4 {
            assert_eq!(y[(4 + d) * 12 + 6], y[(4 - d) * 12 + 6]);
            assert_eq!(y[4 * 12 + 6 + d], y[4 * 12 + 6 - d]);
        }
        // circular: row 0 is distance 4 from center row 4 (not 5)
        assert!((y[6] - (-16.0f64 / 2.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn kernel_self_and_range() {
        let x = random_map(6, 5, 3, 2);
        let z = random_map(6, 5, 3, 3);
        let fft = Fft2::new(6, 5);
        let kxx = gaussian_kernel_correlation(&fft, &x, &x, 0.5).unwrap();
        assert!((kxx[0] - 1.0).abs() < 1e-12);
        let kxz = gaussian_kernel_correlation(&fft, &x, &z, 0.5).unwrap();
        assert!(kxz.iter().all(|&k| k > 0.0 && k <= 1.0));
        assert!(gaussian_kernel_correlation(&fft, &x, &random_map(6, 5, 2, 1), 0.5).is_err());
    }

    #[test]
    fn kernel_one_by_two_enumeration() {
        let x = FeatureMap::from_planes(1, 2, vec![vec![0.3, -0.2]]).unwrap();
        let z = FeatureMap::from_planes(1, 2, vec![vec![0.1, 0.4]]).unwrap();
        let sigma = 0.7;
        let k = gaussian_kernel_correlation(&Fft2::new(1, 2), &x, &z, sigma).unwrap();
        // τ = 0 compares (0.3,-0.2) to (0.1,0.4); τ = 1 compares to (0.4,0.1)
        let d0 = (0.3f64 - 0.1).powi(2) + (-0.2f64 - 0.4).powi(2);
        let d1 = (0.3f64 - 0.4).powi(2) + (-0.2f64 - 0.1).powi(2);
        assert!((k[0] - (-d0 / (sigma * sigma * 2.0)).exp()).abs() < 1e-10);
        assert!((k[1] - (-d1 / (sigma * sigma * 2.0)).exp()).abs() < 1e-10);
    }

    #[test]
    fn train_closed_form_and_limit() {
        let x = random_map(4, 4, 1, 5);
        let fft = Fft2::new(4, 4);
        let y_hat = fft.forward_real(&gaussian_label(4, 4, 2.0, 2.0, 0.5));
        let big = train(&fft, &x, &y_hat, 0.5, 1e12).unwrap();
        assert!(big.data.iter().all(|a| a.norm() < 1e-9));
        // k̂ = 1 everywhere happens for a delta kernel; check the formula directly
        let kf = vec![Complex64::new(1.0, 0.0); 16];
        let alpha: Vec<Complex64> = y_hat.data.iter().zip(&kf).map(|(y, k)| y / (k + 0.25)).collect();
        for (a, y) in alpha.iter().zip(&y_hat.data) {
            assert!((a - y / 1.25).norm() < 1e-15);
        }
    }

    #[test]
    fn train_detect_self_consistency() {
        let x = random_map(16, 16, 1, 9);
        let fft = Fft2::new(16, 16);
        let y_hat = fft.forward_real(&gaussian_label(16, 16, 4.0, 4.0, 0.1));
        let alpha = train(&fft, &x, &y_hat, 0.2, 1e-2).unwrap();
        let resp = detect(&fft, &alpha, &x, &x, 0.2).unwrap();
        assert_eq!(resp.peak, (8, 8));
        assert_eq!(resp.displacement(), (0, 0));
        assert!(resp.max() <= 1.5);
        let shifted = x.circular_shift(2, 3);
        let resp = detect(&fft, &alpha, &x, &shifted, 0.2).unwrap();
        assert_eq!(resp.displacement(), (2, 3));
        let back = x.circular_shift(-5, -7);
        assert_eq!(detect(&fft, &alpha, &x, &back, 0.2).unwrap().displacement(), (-5, -7));
    }

    #[test]
    fn response_peak_tie_rule() {
        let r = ResponseMap::new(2, 2, vec![0.5, 1.0, 1.0, 0.2]);
        assert_eq!(r.peak, (0, 1));
    }

    #[test]
    fn micro_shift_rules() {
        assert_eq!(parabolic_offset(0.7, 1.0, 0.7), 0.0);
        assert!((parabolic_offset(0.5, 1.0, 0.9) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(parabolic_offset(1.0, 1.0, 1.0), 0.0);
        let flat = ResponseMap::new(3, 3, vec![0.4; 9]);
        assert_eq!(micro_shift(&flat), (0.0, 0.0));
        let edge = ResponseMap::new(3, 3, vec![1.0, 0.5, 0.1, 0.9, 0.2, 0.1, 0.1, 0.1, 0.1]);
        assert_eq!(edge.peak, (0, 0));
        assert_eq!(micro_shift(&edge), (0.0, 0.0));
    }
}
