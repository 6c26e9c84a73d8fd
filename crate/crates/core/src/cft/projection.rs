//! Adaptive dimensionality reduction of the selected color-name channels.
//!
//! `R_p = C_p + H`, where `H` accumulates `B Λ Bᵀ` of earlier frames as an
//! exponential moving average; `B` holds the leading eigenvectors of `R_p`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::imaging::FeatureMap;

/// Mean-centered covariance of the per-cell feature vectors, normalized by
/// the number of cells.
pub fn compute_covariance(features: &FeatureMap) -> Result<DMatrix<f64>> {
    let channels: Vec<usize> = (0..features.channels()).collect();
    covariance_of_channels(features, &channels)
}

/// [`compute_covariance`] restricted to `channels`, in the given order.
pub fn covariance_of_channels(features: &FeatureMap, channels: &[usize]) -> Result<DMatrix<f64>> {
    let n = features.cells();
    if n < 2 {
        return Err(Error::Shape("covariance needs at least two cells".into()));
    }
    if let Some(&c) = channels.iter().find(|&&c| c >= features.channels()) {
        return Err(Error::Shape(format!("channel {c} out of range")));
    }
    let centered: Vec<Vec<f64>> = channels
        .iter()
        .map(|&c| {
            let p = features.plane(c);
            let mean = p.iter().sum::<f64>() / n as f64;
            p.iter().map(|v| v - mean).collect()
        })
        .collect();
    let d = channels.len();
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionState {
    /// `D1 x D2`, orthonormal columns
    pub basis: DMatrix<f64>,
    /// eigenvalues paired with the basis columns
    pub weights: Vec<f64>,
    /// accumulated `Σ B Λ Bᵀ`, `D1 x D1`
    pub history: DMatrix<f64>,
}

impl ProjectionState {
    /// Fresh state: truncated identity basis and an empty history.
    pub fn new(d1: usize, d2: usize) -> Self {
        Self {
            basis: DMatrix::identity(d1, d2),
            weights: vec![0.0; d2],
            history: DMatrix::zeros(d1, d1),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `max |BᵀB − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.basis.transpose() * &self.basis;
        (gram - DMatrix::identity(self.output_dim(), self.output_dim())).amax()
    }
}

/// Leading `d2` eigenpairs of a symmetric matrix, eigenvalues descending.
/// Each eigenvector is signed so that its largest-magnitude entry is
/// positive.
pub fn leading_eigenpairs(r: &DMatrix<f64>, d2: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("eigendecomposition of non-finite matrix".into()));
    }
    let n = r.nrows();
    if d2 == 0 || d2 > n {
        return Err(Error::InvalidArgument(format!("cannot keep {d2} of {n} eigenvectors")));
    }
    // symmetrize away round-off before decomposing
    let sym = (r + r.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut basis = DMatrix::zeros(n, d2);
    let mut values = Vec::with_capacity(d2);
    for (k, &idx) in order.iter().take(d2).enumerate() {
        let mut v = eig.eigenvectors.column(idx).clone_owned();
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if pivot < 0.0 {
            v.neg_mut();
        }
        v /= v.norm();
        basis.set_column(k, &v);
        values.push(eig.eigenvalues[idx]);
    }
    Ok((basis, values))
}

/// One update of the projection: EVD of `R = C + history`, keep the `d2`
/// leading eigenvectors, then `history ← (1 − lr)·history + lr·B Λ Bᵀ`.
pub fn update_projection(
    proj: &ProjectionState,
    covariance: &DMatrix<f64>,
    lr_dim: f64,
    d2: usize,
) -> Result<ProjectionState> {
    let d1 = proj.history.nrows();
    if covariance.shape() != (d1, d1) {
        return Err(Error::Shape(format!(
            "covariance {:?} vs history {d1}x{d1}",
            covariance.shape()
        )));
    }
    let r = covariance + &proj.history;
    let (basis, values) = leading_eigenpairs(&r, d2)?;
    let weights: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(weights.clone()));
    let contribution = &basis * lambda * basis.transpose();
    let history = &proj.history * (1.0 - lr_dim) + contribution * lr_dim;
    Ok(ProjectionState {
        basis,
        weights,
        history,
    })
}

/// Keeps channel 0 and maps the `selected` channels through `Bᵀ` per cell:
/// output has `1 + D2` channels.
pub fn project_features(
    features: &FeatureMap,
    selected: &[usize],
    basis: &DMatrix<f64>,
) -> Result<FeatureMap> {
    if basis.nrows() != selected.len() {
        return Err(Error::Shape(format!(
            "basis has {} rows for {} selected channels",
            basis.nrows(),
            selected.len()
        )));
    }
    if let Some(&c) = selected.iter().find(|&&c| c == 0 || c >= features.channels()) {
        return Err(Error::InvalidArgument(format!("selected channel {c} out of range")));
    }
    let (h, w) = (features.height(), features.width());
    let d2 = basis.ncols();
    let mut out = FeatureMap::zeros(h, w, 1 + d2);
    out.plane_mut(0).copy_from_slice(features.plane(0));
    for d in 0..d2 {
        let dst = out.plane_mut(1 + d);
        for (k, &c) in selected.iter().enumerate() {
            let coeff = basis[(k, d)];
            if coeff == 0.0 {
                continue;
            }
            for (o, v) in dst.iter_mut().zip(features.plane(c)) {
                *o += coeff * v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_map(h: usize, w: usize, c: usize, seed: u64) -> FeatureMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planes = (0..c)
            .map(|_| (0..h * w).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        FeatureMap::from_planes(h, w, planes).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let flat = FeatureMap::from_planes(2, 2, vec![vec![3.0; 4], vec![-1.0; 4]]).unwrap();
        assert_eq!(compute_covariance(&flat).unwrap(), DMatrix::zeros(2, 2));
        let two = FeatureMap::from_planes(1, 2, vec![vec![0.0, 2.0], vec![0.0, 2.0]]).unwrap();
        let c = compute_covariance(&two).unwrap();
        assert_eq!(c, DMatrix::from_element(2, 2, 1.0));
        let single = FeatureMap::from_planes(1, 1, vec![vec![1.0]]).unwrap();
        assert!(compute_covariance(&single).is_err());
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let c = compute_covariance(&random_map(5, 6, 4, 3)).unwrap();
        assert_eq!(c, c.transpose());
        assert!(c.symmetric_eigen().eigenvalues.iter().all(|&v| v > -1e-12));
    }

    #[test]
    fn first_update_picks_largest_axes() {
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 3.0, 2.0, 1.0, 0.5]));
        let p = update_projection(&ProjectionState::new(5, 2), &c, 0.1, 2).unwrap();
        assert!((p.basis[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((p.basis[(1, 1)] - 1.0).abs() < 1e-12);
        assert!(p.basis.rows(2, 3).amax() < 1e-12);
        assert_eq!(p.weights, vec![4.0, 3.0]);
        assert!(p.orthonormality_error() < 1e-8);
        assert!((p.history[(0, 0)] - 0.4).abs() < 1e-12);
        assert!((p.history[(1, 1)] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn repeated_covariance_stabilizes_subspace() {
        let map = random_map(6, 6, 6, 8);
        let c = compute_covariance(&map).unwrap();
        let mut p = ProjectionState::new(6, 3);
        let mut prev: Option<DMatrix<f64>> = None;
        let mut last_angle = f64::INFINITY;
        for _ in 0..10 {
            p = update_projection(&p, &c, 0.1, 3).unwrap();
            assert!(p.orthonormality_error() < 1e-8);
            if let Some(q) = &prev {
                // sin of the largest principal angle between consecutive subspaces
                let proj = q * q.transpose();
                let resid = &p.basis - &proj * &p.basis;
                last_angle = resid.norm();
            }
            prev = Some(p.basis.clone());
        }
        assert!(last_angle < 1e-9, "{last_angle}");
    }

    #[test]
    fn non_finite_covariance_rejected() {
        let mut c = DMatrix::identity(3, 3);
        c[(1, 2)] = f64::NAN;
        assert!(matches!(
            update_projection(&ProjectionState::new(3, 2), &c, 0.1, 2),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn projection_identity_zero_and_norm() {
        let map = random_map(4, 5, 4, 1);
        let out = project_features(&map, &[1, 2, 3], &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(out.plane(0), map.plane(0));
        for k in 1..4 {
            assert_eq!(out.plane(k), map.plane(k));
        }
        let zero = FeatureMap::zeros(3, 3, 4);
        let out = project_features(&zero, &[1, 2, 3], &DMatrix::identity(3, 2)).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0.0));

        // random orthogonal basis keeps per-cell norm of the selected subvector
        let q = DMatrix::from_fn(3, 3, |i, j| ((i * 3 + j) as f64 * 1.3).sin())
            .qr()
            .q();
        let out = project_features(&map, &[1, 2, 3], &q).unwrap();
        for r in 0..4 {
            for c in 0..5 {
                let a: f64 = (1..4).map(|k| map.at(r, c, k).powi(2)).sum();
                let b: f64 = (1..4).map(|k| out.at(r, c, k).powi(2)).sum();
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(project_features(&map, &[1, 2, 9], &q).is_err());
        assert!(project_features(&map, &[0, 1, 2], &q).is_err());
    }
}
