//! Online dictionary learning with ℓ1 sparse codes.
//!
//! Codes come from cyclic coordinate descent on the lasso; atoms are refit
//! by block coordinate descent on the accumulated sufficient statistics
//! `A = Σ ααᵀ`, `B = Σ xαᵀ`. Atoms are kept on the unit sphere.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const CODE_TOL: f64 = 1e-6;
const CODE_MAX_SWEEPS: usize = 1000;
const ATOM_TOL: f64 = 1e-7;
const USED_ATOM_MASS: f64 = 1e-10;

#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: DMatrix<f64>,
    acc_codes: DMatrix<f64>,
    acc_data: DMatrix<f64>,
    /// Σ ½‖x‖² and Σ λ‖α‖₁ over seen samples, for the surrogate objective
    acc_half_sq_norm: f64,
    acc_penalty: f64,
    seen: usize,
    sparsity: f64,
    max_iters: usize,
    /// atoms with nonzero code mass, ascending
    used: Vec<usize>,
}

impl Dictionary {
    /// Dictionary from explicit atoms; every column is normalized.
    pub fn from_atoms(mut atoms: DMatrix<f64>, sparsity: f64, max_iters: usize) -> Result<Self> {
        if atoms.ncols() == 0 || atoms.nrows() == 0 {
            return Err(Error::InvalidArgument("dictionary needs at least one atom".into()));
        }
        for mut col in atoms.column_iter_mut() {
            let n = col.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::InvalidArgument("zero or non-finite atom".into()));
            }
            col /= n;
        }
        let (m, k) = atoms.shape();
        Ok(Self {
            atoms,
            acc_codes: DMatrix::zeros(k, k),
            acc_data: DMatrix::zeros(m, k),
            acc_half_sq_norm: 0.0,
            acc_penalty: 0.0,
            seen: 0,
            sparsity,
            max_iters,
            used: Vec::new(),
        })
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn len(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.ncols() == 0
    }

    pub fn seen(&self) -> usize {
        self.seen
    }

    pub fn sparsity(&self) -> f64 {
        self.sparsity
    }

    pub fn acc_codes(&self) -> &DMatrix<f64> {
        &self.acc_codes
    }

    pub fn max_column_norm_error(&self) -> f64 {
        self.atoms
            .column_iter()
            .map(|c| (c.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Lasso code of `x`: `argmin ½‖x − Dα‖² + λ‖α‖₁`.
    pub fn sparse_code(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!(
                "sample length {} vs atom length {}",
                x.len(),
                self.dim()
            )));
        }
        if x.norm() > 1.0 + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "sample norm {} exceeds 1",
                x.norm()
            )));
        }
        let k = self.len();
        let lambda = self.sparsity;
        let mut alpha = DVector::zeros(k);
        let mut residual = x.clone();
        let mut sweeps = 0;
        let mut active: Vec<usize> = Vec::new();

        let coord = |j: usize, alpha: &mut DVector<f64>, residual: &mut DVector<f64>| -> f64 {
            let d = self.atoms.column(j);
            let old = alpha[j];
            let new = soft_threshold(d.dot(residual) + old, lambda);
            let delta = new - old;
            if delta != 0.0 {
                residual.axpy(-delta, &d, 1.0);
                alpha[j] = new;
            }
            delta.abs()
        };

        while sweeps < CODE_MAX_SWEEPS {
            let mut max_change: f64 = 0.0;
            for j in 0..k {
                max_change = max_change.max(coord(j, &mut alpha, &mut residual));
            }
            sweeps += 1;
            if max_change < CODE_TOL {
                break;
            }
            active.clear();
            active.extend((0..k).filter(|&j| alpha[j] != 0.0));
            while sweeps < CODE_MAX_SWEEPS {
                let mut change: f64 = 0.0;
                for &j in &active {
                    change = change.max(coord(j, &mut alpha, &mut residual));
                }
                sweeps += 1;
                if change < CODE_TOL {
                    break;
                }
            }
        }
        Ok(alpha)
    }

    /// `‖x − Dα‖²` for the lasso code of `x`.
    pub fn reconstruction_error(&self, x: &DVector<f64>) -> Result<f64> {
        let alpha = self.sparse_code(x)?;
        Ok((x - &self.atoms * alpha).norm_squared())
    }

    /// Codes `x`, accumulates it, then refits the atoms.
    pub fn update(&mut self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let alpha = self.sparse_code(x)?;
        self.accumulate(x, &alpha)?;
        self.refit_atoms();
        Ok(alpha)
    }

    /// Adds one sample and its code to the sufficient statistics.
    pub fn accumulate(&mut self, x: &DVector<f64>, alpha: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() || alpha.len() != self.len() {
            return Err(Error::Shape("sample or code length differs from dictionary".into()));
        }
        let nz: Vec<usize> = (0..alpha.len()).filter(|&j| alpha[j] != 0.0).collect();
        for &i in &nz {
            for &j in &nz {
                self.acc_codes[(i, j)] += alpha[i] * alpha[j];
            }
            self.acc_data.column_mut(i).axpy(alpha[i], x, 1.0);
        }
        self.acc_half_sq_norm += 0.5 * x.norm_squared();
        self.acc_penalty += self.sparsity * alpha.lp_norm(1);
        self.seen += 1;
        self.used = (0..self.len())
            .filter(|&j| self.acc_codes[(j, j)] > USED_ATOM_MASS)
            .collect();
        Ok(())
    }

    /// Average surrogate `(½ Tr(DᵀDA) − Tr(DᵀB) + Σ½‖x‖² + Σλ‖α‖₁) / t`.
    pub fn surrogate_objective(&self) -> f64 {
        if self.seen == 0 {
            return 0.0;
        }
        let (d, a, b) = self.used_blocks();
        self.surrogate_of(&d, &a, &b)
    }

    /// Used atoms, the matching block of `A` and columns of `B`, compacted.
    fn used_blocks(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let used = &self.used;
        let d = self.atoms.select_columns(used);
        let a = DMatrix::from_fn(used.len(), used.len(), |i, j| self.acc_codes[(used[i], used[j])]);
        let b = self.acc_data.select_columns(used);
        (d, a, b)
    }

    fn surrogate_of(&self, d: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let gram = d.tr_mul(d);
        let quad = gram.component_mul(a).sum();
        let lin = d.component_mul(b).sum();
        (0.5 * quad - lin + self.acc_half_sq_norm + self.acc_penalty) / self.seen as f64
    }

    /// Block coordinate descent over the used atoms until the largest atom
    /// change drops below tolerance or `max_iters` sweeps run.
    pub fn refit_atoms(&mut self) -> usize {
        self.refit(None)
    }

    /// As [`Dictionary::refit_atoms`], calling `after_sweep` with the
    /// surrogate objective after each sweep. Returns the sweep count.
    pub fn refit_atoms_traced(&mut self, mut after_sweep: impl FnMut(f64)) -> usize {
        self.refit(Some(&mut after_sweep))
    }

    fn refit(&mut self, mut after_sweep: Option<&mut dyn FnMut(f64)>) -> usize {
        if self.used.is_empty() {
            return 0;
        }
        // work on compact copies; unused atoms never change
        let (mut d, a, b) = self.used_blocks();
        let m = d.nrows();
        let mut u = DVector::zeros(m);
        let mut sweeps = 0;
        while sweeps < self.max_iters {
            let mut max_change: f64 = 0.0;
            for k in 0..d.ncols() {
                // u = (b_k − D a_k) / A_kk + d_k
                let akk = a[(k, k)];
                u.copy_from(&b.column(k));
                u.gemv(-1.0, &d, &a.column(k), 1.0);
                u /= akk;
                u += d.column(k);
                let norm = u.norm();
                if !(norm > 0.0) || !norm.is_finite() {
                    continue;
                }
                u /= norm;
                let change = (&u - d.column(k)).amax();
                max_change = max_change.max(change);
                d.set_column(k, &u);
            }
            sweeps += 1;
            if let Some(f) = after_sweep.as_mut() {
                f(self.surrogate_of(&d, &a, &b));
            }
            if max_change < ATOM_TOL {
                break;
            }
        }
        for (k, &j) in self.used.iter().enumerate() {
            self.atoms.set_column(j, &d.column(k));
        }
        sweeps
    }
}

/// Seeds first (normalized, zero seeds skipped), then seeded Gaussian unit
/// vectors up to `k` atoms.
pub fn init_dictionary(
    seeds: &[DVector<f64>],
    k: usize,
    rng_seed: u64,
    sparsity: f64,
    max_iters: usize,
) -> Result<Dictionary> {
    let nonzero: Vec<&DVector<f64>> = seeds.iter().filter(|s| s.norm() > 0.0).collect();
    let Some(first) = nonzero.first() else {
        return Err(Error::InvalidArgument("all seed patches are zero".into()));
    };
    if k == 0 {
        return Err(Error::InvalidArgument("dictionary size must be positive".into()));
    }
    let m = first.len();
    if nonzero.iter().any(|s| s.len() != m) {
        return Err(Error::Shape("seed patches differ in length".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut atoms = DMatrix::zeros(m, k);
    for j in 0..k {
        let col = match nonzero.get(j) {
            Some(s) => (*s).clone(),
            None => loop {
                let v = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
                if v.norm() > 0.0 {
                    break v;
                }
            },
        };
        atoms.set_column(j, &col);
    }
    Dictionary::from_atoms(atoms, sparsity, max_iters)
}
