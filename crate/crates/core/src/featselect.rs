//! Supervised per-frame feature ranking.
//!
//! Target cells are positives, the surrounding background cells negatives.
//! Each feature gets a Fisher score, a two-sided t-test p-value and a
//! Pearson correlation with the class label; the three are fused into one
//! score vector `s`, the graph `A = s sᵀ` is built, and features are ranked
//! by the row sums of `Σ_{l≥1} rˡAˡ = (I − rA)⁻¹ − I`.

use nalgebra::DMatrix;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, FeatureMap};

/// Fisher score assigned to a feature with distinct class means and zero
/// within-class variance.
pub const FISHER_SEPARABLE: f64 = 1e12;

/// Two-class sample matrices, row-major `n x features`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSamples {
    features: usize,
    positives: Vec<f64>,
    negatives: Vec<f64>,
}

impl ClassSamples {
    pub fn new(features: usize, positives: Vec<f64>, negatives: Vec<f64>) -> Result<Self> {
        if features == 0 {
            return Err(Error::Samples("feature count must be at least 1".into()));
        }
        if !positives.len().is_multiple_of(features) || !negatives.len().is_multiple_of(features) {
            return Err(Error::Shape(format!(
                "sample buffers not a multiple of {features} features"
            )));
        }
        if positives.is_empty() || negatives.is_empty() {
            return Err(Error::Samples("empty positive or negative set".into()));
        }
        if positives.iter().chain(&negatives).any(|v| !v.is_finite()) {
            return Err(Error::Samples("non-finite sample value".into()));
        }
        Ok(Self {
            features,
            positives,
            negatives,
        })
    }

    /// Builds samples from per-row vectors.
    pub fn from_rows(positives: &[Vec<f64>], negatives: &[Vec<f64>]) -> Result<Self> {
        let features = positives.first().map_or(0, Vec::len);
        if positives.iter().chain(negatives).any(|r| r.len() != features) {
            return Err(Error::Shape("ragged sample rows".into()));
        }
        Self::new(features, positives.concat(), negatives.concat())
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn n_positive(&self) -> usize {
        self.positives.len() / self.features
    }

    pub fn n_negative(&self) -> usize {
        self.negatives.len() / self.features
    }

    pub fn positive_column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.positives.iter().skip(i).step_by(self.features).copied()
    }

    pub fn negative_column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.negatives.iter().skip(i).step_by(self.features).copied()
    }

    fn require_two_each(&self) -> Result<()> {
        if self.n_positive() < 2 || self.n_negative() < 2 {
            return Err(Error::Samples(format!(
                "need at least 2 samples per class, have {} positive and {} negative",
                self.n_positive(),
                self.n_negative()
            )));
        }
        Ok(())
    }

    fn class_stats(&self, i: usize) -> (Moments, Moments) {
        (
            Moments::of(&self.positive_column(i).collect::<Vec<_>>()),
            Moments::of(&self.negative_column(i).collect::<Vec<_>>()),
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    /// unbiased
    var: f64,
}

impl Moments {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let var = if n > 1.0 { ss / (n - 1.0) } else { 0.0 };
        Self { n, mean, var }
    }
}

/// Splits a feature map into target cells (positives) and every remaining
/// cell of the map (negatives). `target` is in cell coordinates; a cell
/// belongs to the target when its center `(col + 0.5, row + 0.5)` lies in
/// `[x0, x1) x [y0, y1)`.
pub fn label_samples(map: &FeatureMap, target: &BoundingBox) -> Result<ClassSamples> {
    let (x0, y0, w, h) = target.top_left();
    let (x1, y1) = (x0 + w, y0 + h);
    let f = map.channels();
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for row in 0..map.height() {
        let yc = row as f64 + 0.5;
        let in_rows = yc >= y0 && yc < y1;
        for col in 0..map.width() {
            let xc = col as f64 + 0.5;
            let dst = if in_rows && xc >= x0 && xc < x1 {
                &mut positives
            } else {
                &mut negatives
            };
            dst.extend((0..f).map(|c| map.at(row, col, c)));
        }
    }
    if positives.is_empty() {
        return Err(Error::Samples("target covers no cells of the map".into()));
    }
    if negatives.is_empty() {
        return Err(Error::Samples("target covers the whole map: no background".into()));
    }
    ClassSamples::new(f, positives, negatives)
}

/// `|μ₁ − μ₂|² / (σ₁² + σ₂²)` per feature with unbiased variances.
pub fn fisher_scores(samples: &ClassSamples) -> Result<Vec<f64>> {
    samples.require_two_each()?;
    Ok((0..samples.features())
        .map(|i| {
            let (p, n) = samples.class_stats(i);
            let num = (p.mean - n.mean).powi(2);
            let den = p.var + n.var;
            if den > 0.0 {
                num / den
            } else if num == 0.0 {
                0.0
            } else {
                FISHER_SEPARABLE
            }
        })
        .collect())
}

/// Two-sided p-values of `t = (μ₁ − μ₂) / sqrt(σ₁²/n₁ + σ₂²/n₂)` under a
/// Student t distribution with `n₁ + n₂ − 2` degrees of freedom.
pub fn ttest_scores(samples: &ClassSamples) -> Result<Vec<f64>> {
    samples.require_two_each()?;
    let df = (samples.n_positive() + samples.n_negative() - 2) as f64;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok((0..samples.features())
        .map(|i| {
            let (p, n) = samples.class_stats(i);
            let diff = p.mean - n.mean;
            let se = (p.var / p.n + n.var / n.n).sqrt();
            if se == 0.0 {
                return if diff == 0.0 { 1.0 } else { 0.0 };
            }
            let t = (diff / se).abs();
            (2.0 * dist.sf(t)).clamp(0.0, 1.0)
        })
        .collect())
}

/// Pearson correlation of each feature with the ±1 class label over the
/// pooled samples; 0 for a feature with no pooled variance.
pub fn pearson_scores(samples: &ClassSamples) -> Vec<f64> {
    let n1 = samples.n_positive() as f64;
    let n2 = samples.n_negative() as f64;
    let n = n1 + n2;
    let label_mean = (n1 - n2) / n;
    let label_ss = n1 * (1.0 - label_mean).powi(2) + n2 * (-1.0 - label_mean).powi(2);
    (0..samples.features())
        .map(|i| {
            let sum: f64 = samples.positive_column(i).chain(samples.negative_column(i)).sum();
            let mean = sum / n;
            let mut cov = 0.0;
            let mut ss = 0.0;
            for v in samples.positive_column(i) {
                cov += (v - mean) * (1.0 - label_mean);
                ss += (v - mean).powi(2);
            }
            for v in samples.negative_column(i) {
                cov += (v - mean) * (-1.0 - label_mean);
                ss += (v - mean).powi(2);
            }
            if ss <= 0.0 || label_ss <= 0.0 {
                0.0
            } else {
                (cov / (ss * label_ss).sqrt()).clamp(-1.0, 1.0)
            }
        })
        .collect()
}

/// Per-feature evaluation under the three class-separation criteria.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricScores {
    pub fisher: Vec<f64>,
    pub ttest_p: Vec<f64>,
    pub pearson: Vec<f64>,
    pub fused: Vec<f64>,
}

impl MetricScores {
    pub fn compute(samples: &ClassSamples) -> Result<Self> {
        let fisher = fisher_scores(samples)?;
        let ttest_p = ttest_scores(samples)?;
        let pearson = pearson_scores(samples);
        let fused = fuse_scores(&fisher, &ttest_p, &pearson)?;
        Ok(Self {
            fisher,
            ttest_p,
            pearson,
            fused,
        })
    }
}

/// Mean of max-normalized Fisher, `1 − p` and `|c|`; each term lies in
/// `[0, 1]` with larger meaning more discriminative.
pub fn fuse_scores(fisher: &[f64], ttest_p: &[f64], pearson: &[f64]) -> Result<Vec<f64>> {
    if fisher.len() != ttest_p.len() || fisher.len() != pearson.len() {
        return Err(Error::Shape(format!(
            "metric lengths differ: {}, {}, {}",
            fisher.len(),
            ttest_p.len(),
            pearson.len()
        )));
    }
    let max_fisher = fisher.iter().copied().fold(0.0, f64::max);
    Ok(fisher
        .iter()
        .zip(ttest_p)
        .zip(pearson)
        .map(|((&f, &p), &c)| {
            let f_norm = if max_fisher > 0.0 { f / max_fisher } else { 0.0 };
            ((f_norm + (1.0 - p) + c.abs()) / 3.0).clamp(0.0, 1.0)
        })
        .collect())
}

/// `A = s sᵀ`.
pub fn build_adjacency(s: &[f64]) -> Result<DMatrix<f64>> {
    if let Some(v) = s.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "adjacency scores must be nonnegative, found {v}"
        )));
    }
    let n = s.len();
    Ok(DMatrix::from_fn(n, n, |i, j| s[i] * s[j]))
}

/// Path decay used by [`inffs_energies`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `r = 0.9 / ρ(A)`.
    Auto,
    Fixed(f64),
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Resolves the decay factor for `a`, `None` for an all-zero graph under
/// [`Decay::Auto`].
pub fn resolve_decay(a: &DMatrix<f64>, decay: Decay) -> Option<f64> {
    match decay {
        Decay::Fixed(r) => Some(r),
        Decay::Auto => {
            let rho = spectral_radius(a);
            (rho > 0.0).then(|| 0.9 / rho)
        }
    }
}

/// Sum over all path lengths `S = (I − rA)⁻¹ − I`.
pub fn path_sum_matrix(a: &DMatrix<f64>, r: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let rho = spectral_radius(a);
    if !(r > 0.0) || r * rho >= 1.0 - 1e-12 {
        return Err(Error::Numeric(format!(
            "decay r = {r} with spectral radius {rho}: need 0 < r * rho(A) < 1"
        )));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let inv = (&id - a * r).try_inverse().ok_or_else(|| {
        Error::Numeric(format!(
            "I - rA is singular for r = {r}; r must satisfy r * rho(A) < 1"
        ))
    })?;
    Ok(inv - id)
}

/// Inf-FS energies: row sums of the infinite path-sum matrix.
pub fn inffs_energies(a: &DMatrix<f64>, decay: Decay) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "adjacency must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let Some(r) = resolve_decay(a, decay) else {
        return Ok(vec![0.0; a.nrows()]);
    };
    let s = path_sum_matrix(a, r)?;
    // negative residue from the inverse is numerical noise
    Ok(s.row_iter().map(|row| row.sum().max(0.0)).collect())
}

/// Indices of the `k` largest energies in descending order; ties go to the
/// lower index.
pub fn select_top_k(energies: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > energies.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            energies.len()
        )));
    }
    let mut order = rank_order(energies);
    order.truncate(k);
    Ok(order)
}

/// Full descending permutation with the lower-index tie rule.
pub fn rank_order(energies: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[b].total_cmp(&energies[a]).then(a.cmp(&b)));
    order
}

/// Everything computed while ranking one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub metrics: MetricScores,
    pub adjacency: DMatrix<f64>,
    pub energies: Vec<f64>,
    pub order: Vec<usize>,
    pub selected: Vec<usize>,
}

impl Ranking {
    /// One CSV record: frame, fisher[F], ttest_p[F], pearson[F], energies[F], selected[k].
    pub fn csv_line(&self, frame: usize) -> String {
        let mut fields = vec![frame.to_string()];
        for v in self
            .metrics
            .fisher
            .iter()
            .chain(&self.metrics.ttest_p)
            .chain(&self.metrics.pearson)
            .chain(&self.energies)
        {
            fields.push(format!("{v:.6e}"));
        }
        fields.extend(self.selected.iter().map(usize::to_string));
        fields.join(",")
    }
}

/// Runs the full ranking pipeline on labelled samples.
pub fn rank_features(samples: &ClassSamples, decay: Decay, k: usize) -> Result<Ranking> {
    let metrics = MetricScores::compute(samples)?;
    let adjacency = build_adjacency(&metrics.fused)?;
    let energies = inffs_energies(&adjacency, decay)?;
    let order = rank_order(&energies);
    let selected = select_top_k(&energies, k)?;
    Ok(Ranking {
        metrics,
        adjacency,
        energies,
        order,
        selected,
    })
}
