//! Presence masks, zero-padding and synthetic missingness.
//!
//! A sample with missing attributes is carried as a [`MaskedVector`]: the
//! raw values together with a boolean presence mask, where every unobserved
//! position holds exactly `0.0`. That zero-padded form is what all kernels
//! read, so there is a single representation for both the raw and the
//! masked view of a sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Feature values plus a presence mask, zero-padded at missing positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskedVector {
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl MaskedVector {
    /// A vector with every entry observed.
    pub fn complete(values: Vec<f64>) -> Self {
        let mask = vec![true; values.len()];
        MaskedVector { values, mask }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    /// Euclidean norm of the zero-padded values.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Keeps only the listed dimensions, in the given order.
    pub fn select(&self, dims: &[usize]) -> Result<MaskedVector> {
        if let Some(&bad) = dims.iter().find(|&&d| d >= self.dim()) {
            return Err(Error::shape(self.dim(), bad + 1));
        }
        Ok(MaskedVector {
            values: dims.iter().map(|&d| self.values[d]).collect(),
            mask: dims.iter().map(|&d| self.mask[d]).collect(),
        })
    }

    pub(crate) fn check_same_dim(&self, other: &MaskedVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::shape(self.dim(), other.dim()));
        }
        Ok(())
    }
}

/// Builds the zero-padded vector `x ⊗ B`: values are kept where the mask is
/// set and replaced by zero elsewhere.
pub fn to_masked(values: &[f64], mask: &[bool]) -> Result<MaskedVector> {
    if values.len() != mask.len() {
        return Err(Error::shape(values.len(), mask.len()));
    }
    let values = values
        .iter()
        .zip(mask)
        .map(|(&v, &m)| if m { v } else { 0.0 })
        .collect();
    Ok(MaskedVector {
        values,
        mask: mask.to_vec(),
    })
}

/// Restricts both vectors to their common observed support.
///
/// The two outputs share the same mask (the elementwise AND of the inputs)
/// and keep their original values on that support.
pub fn double_mask(a: &MaskedVector, b: &MaskedVector) -> Result<(MaskedVector, MaskedVector)> {
    a.check_same_dim(b)?;
    let common: Vec<bool> = a.mask.iter().zip(&b.mask).map(|(&x, &y)| x && y).collect();
    Ok((to_masked(&a.values, &common)?, to_masked(&b.values, &common)?))
}

/// Rate and seed for uniform synthetic missingness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissingSpec {
    rate: f64,
    seed: u64,
}

impl MissingSpec {
    pub fn new(rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::param("rate", format!("{rate} is outside [0, 1)")));
        }
        Ok(MissingSpec { rate, seed })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Marks each cell missing independently with probability `spec.rate()`.
///
/// Every row draws from its own ChaCha stream (`seed`, stream = row index),
/// so the pattern of a row does not depend on how many rows precede it or on
/// the order rows are processed in. Cells that are already missing stay
/// missing; a uniform draw is still consumed for them so the pattern of the
/// remaining cells does not depend on the natural missingness.
pub fn inject_missing(d: &Dataset, spec: &MissingSpec) -> Dataset {
    if spec.rate == 0.0 {
        return d.clone();
    }
    let m = d.n_dims();
    let mut presence = Vec::with_capacity(d.n_rows() * m);
    for row in 0..d.n_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(row as u64);
        for &present in d.row_mask(row) {
            let drop = rng.gen::<f64>() < spec.rate;
            presence.push(present && !drop);
        }
    }
    d.with_presence(presence)
        .expect("presence matrix built with the dataset's own shape")
}
