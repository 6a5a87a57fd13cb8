//! Class-conditional moments over observed entries, Partial Fisher
//! Discriminant Ratios and FDR-ranked feature selection.
//!
//! For dimension `t`, the Partial Fisher Discriminant Ratio compares the two
//! class distributions using only entries that were actually observed:
//!
//! ```text
//! F_t = (μ⁺_t − μ⁻_t)² / ((σ⁺_t)² + (σ⁻_t)² + eps)
//! ```
//!
//! Means and sample variances are accumulated one observation at a time.
//! Appending a value equal to the running mean keeps the mean and scales the
//! sample variance by `(n − 1) / n`, which is why class-mean imputation can
//! never lower `F_t`, while appending zeros drags the mean toward the origin.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

/// Denominator guard for [`partial_fdr`].
pub const DEFAULT_FDR_EPS: f64 = 1e-12;

/// One step of the running mean: `mu + (eta − mu) / (n + 1)`.
pub fn incremental_mean(mu: f64, n: u64, eta: f64) -> f64 {
    mu + (eta - mu) / (n as f64 + 1.0)
}

/// Streaming mean and sample variance (Welford's update).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningMoments {
    count: u64,
    mean: f64,
    /// Sum of squared deviations from the running mean.
    m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    /// State equivalent to having seen `count` values with the given sample
    /// variance. `var` is ignored when `count < 2`.
    pub fn from_summary(count: u64, mean: f64, var: f64) -> Self {
        let m2 = if count >= 2 { var * (count - 1) as f64 } else { 0.0 };
        RunningMoments { count, mean, m2 }
    }

    pub fn push(&mut self, eta: f64) {
        let delta = eta - self.mean;
        self.mean = incremental_mean(self.mean, self.count, eta);
        self.count += 1;
        self.m2 += delta * (eta - self.mean);
    }

    /// Returns the updated state, leaving `self` untouched.
    pub fn pushed(mut self, eta: f64) -> Self {
        self.push(eta);
        self
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `None` until at least one value has been seen.
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    /// Sample variance; `None` until two values have been seen.
    pub fn variance(&self) -> Option<f64> {
        (self.count >= 2).then(|| (self.m2 / (self.count - 1) as f64).max(0.0))
    }
}

impl FromIterator<f64> for RunningMoments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = RunningMoments::new();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

/// Per-dimension moments of one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialMoments {
    dims: Vec<RunningMoments>,
}

impl PartialMoments {
    pub fn from_dims(dims: Vec<RunningMoments>) -> Self {
        PartialMoments { dims }
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, t: usize) -> &RunningMoments {
        &self.dims[t]
    }

    pub fn mean(&self, t: usize) -> Option<f64> {
        self.dims[t].mean()
    }

    pub fn var(&self, t: usize) -> Option<f64> {
        self.dims[t].variance()
    }

    pub fn count(&self, t: usize) -> u64 {
        self.dims[t].count()
    }
}

/// Moments of the rows carrying `label`, using observed entries only.
/// Rows are visited in storage order, so results are reproducible bit for bit.
pub fn partial_moments(d: &Dataset, label: Label) -> PartialMoments {
    let mut dims = vec![RunningMoments::new(); d.n_dims()];
    for row in (0..d.n_rows()).filter(|&r| d.label(r) == label) {
        for ((acc, &v), &present) in dims.iter_mut().zip(d.row_values(row)).zip(d.row_mask(row)) {
            if present {
                acc.push(v);
            }
        }
    }
    PartialMoments { dims }
}

/// FDR per dimension and the dimensions ranked by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdrReport {
    pub f: Vec<f64>,
    pub ranked_dims: Vec<usize>,
}

impl FdrReport {
    /// Ranks `f` descending; equal scores keep ascending dimension order.
    pub fn from_scores(f: Vec<f64>) -> Self {
        let mut ranked_dims: Vec<usize> = (0..f.len()).collect();
        ranked_dims.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
        FdrReport { f, ranked_dims }
    }
}

/// Partial Fisher Discriminant Ratio of every dimension. A dimension where
/// either class has fewer than two observations scores zero.
pub fn partial_fdr(pos: &PartialMoments, neg: &PartialMoments, eps: f64) -> Result<FdrReport> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", format!("{eps} must be positive")));
    }
    if pos.n_dims() != neg.n_dims() {
        return Err(Error::shape(pos.n_dims(), neg.n_dims()));
    }
    let f = (0..pos.n_dims())
        .map(|t| match (pos.var(t), neg.var(t)) {
            (Some(vp), Some(vn)) => {
                let gap = pos.dim(t).mean - neg.dim(t).mean;
                gap * gap / (vp + vn + eps)
            }
            _ => 0.0,
        })
        .collect();
    Ok(FdrReport::from_scores(f))
}

/// FDR of a labeled dataset computed from its observed entries.
pub fn dataset_fdr(d: &Dataset) -> FdrReport {
    partial_fdr(
        &partial_moments(d, Label::Positive),
        &partial_moments(d, Label::Negative),
        DEFAULT_FDR_EPS,
    )
    .expect("moments share the dataset's dimension and eps is positive")
}

/// The `k` highest-scoring dimensions, best first.
pub fn select_top_k(r: &FdrReport, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > r.ranked_dims.len() {
        return Err(Error::param(
            "k",
            format!("{k} is outside 1..={}", r.ranked_dims.len()),
        ));
    }
    Ok(r.ranked_dims[..k].to_vec())
}
