use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Row-major `h x w` complex grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub h: usize,
    pub w: usize,
    pub data: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(h: usize, w: usize) -> Self {
        Self {
            h,
            w,
            data: vec![Complex64::new(0.0, 0.0); h * w],
        }
    }

    pub fn from_real(h: usize, w: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), h * w, "grid length");
        Self {
            h,
            w,
            data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn real(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.re).collect()
    }

    pub fn same_shape(&self, other: &Spectrum) -> bool {
        self.h == other.h && self.w == other.w
    }
}

/// Cached forward/inverse plans for one 2-D extent. The forward transform is
/// unnormalized; the inverse divides by `h * w`.
#[derive(Clone)]
pub struct Fft2 {
    h: usize,
    w: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("h", &self.h).field("w", &self.w).finish()
    }
}

impl Fft2 {
    pub fn new(h: usize, w: usize) -> Self {
        assert!(h > 0 && w > 0, "transform extent must be positive");
        let mut planner = FftPlanner::new();
        Self {
            h,
            w,
            row_fwd: planner.plan_fft_forward(w),
            row_inv: planner.plan_fft_inverse(w),
            col_fwd: planner.plan_fft_forward(h),
            col_inv: planner.plan_fft_inverse(h),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.h, self.w)
    }

    pub fn forward(&self, x: &Spectrum) -> Spectrum {
        let mut out = x.clone();
        self.forward_in_place(&mut out);
        out
    }

    pub fn forward_real(&self, values: &[f64]) -> Spectrum {
        let mut out = Spectrum::from_real(self.h, self.w, values);
        self.forward_in_place(&mut out);
        out
    }

    pub fn inverse(&self, x: &Spectrum) -> Spectrum {
        let mut out = x.clone();
        self.inverse_in_place(&mut out);
        out
    }

    pub fn forward_in_place(&self, x: &mut Spectrum) {
        self.transform(x, &self.row_fwd, &self.col_fwd);
    }

    pub fn inverse_in_place(&self, x: &mut Spectrum) {
        self.transform(x, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (self.h * self.w) as f64;
        x.data.iter_mut().for_each(|v| *v *= scale);
    }

    fn transform(&self, x: &mut Spectrum, rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        assert_eq!((x.h, x.w), (self.h, self.w), "spectrum extent differs from plan");
        rows.process(&mut x.data);
        let mut column = vec![Complex64::new(0.0, 0.0); self.h];
        for c in 0..self.w {
            for (r, v) in column.iter_mut().enumerate() {
                *v = x.data[r * self.w + c];
            }
            cols.process(&mut column);
            for (r, v) in column.iter().enumerate() {
                x.data[r * self.w + c] = *v;
            }
        }
    }
}

/// One-shot 2-D DFT.
pub fn dft2(x: &Spectrum) -> Spectrum {
    Fft2::new(x.h, x.w).forward(x)
}

/// One-shot inverse 2-D DFT, `idft2(dft2(x)) == x`.
pub fn idft2(x: &Spectrum) -> Spectrum {
    Fft2::new(x.h, x.w).inverse(x)
}
