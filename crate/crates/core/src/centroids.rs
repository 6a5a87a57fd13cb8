//! Class-dependent centroids built from observed training entries.
//!
//! The centroid of a class is the per-dimension mean of the entries that
//! were actually observed in that class; missing entries leave the running
//! mean untouched. No clustering is involved. Centroids are fitted once on
//! the training split and then frozen.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::masking::MaskedVector;
use crate::stats::incremental_mean;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCentroid {
    pub class_label: Label,
    pub mean: Vec<f64>,
    pub count: Vec<u64>,
}

impl ClassCentroid {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Dimensions never observed in this class; their mean is 0.
    pub fn starved_dims(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.count[i] == 0).collect()
    }

    /// Restricts to the listed dimensions, in the given order.
    pub fn select(&self, dims: &[usize]) -> Result<ClassCentroid> {
        if let Some(&bad) = dims.iter().find(|&&d| d >= self.dim()) {
            return Err(Error::shape(self.dim(), bad + 1));
        }
        Ok(ClassCentroid {
            class_label: self.class_label,
            mean: dims.iter().map(|&d| self.mean[d]).collect(),
            count: dims.iter().map(|&d| self.count[d]).collect(),
        })
    }
}

/// Streams the rows of `label` through the running-mean update, skipping
/// missing entries.
pub fn class_centroid(train: &Dataset, label: Label) -> Result<ClassCentroid> {
    let m = train.n_dims();
    let mut mean = vec![0.0; m];
    let mut count = vec![0u64; m];
    let mut rows = 0usize;
    for r in (0..train.n_rows()).filter(|&r| train.label(r) == label) {
        rows += 1;
        for (i, (&v, &present)) in train.row_values(r).iter().zip(train.row_mask(r)).enumerate() {
            if present {
                mean[i] = incremental_mean(mean[i], count[i], v);
                count[i] += 1;
            }
        }
    }
    if rows == 0 {
        return Err(Error::EmptyClass(label));
    }
    Ok(ClassCentroid {
        class_label: label,
        mean,
        count,
    })
}

/// Literal sum `x̃ + z`: observed dimensions hold value + class mean,
/// missing dimensions hold the class mean alone.
pub fn centroid_augment(x: &MaskedVector, z: &ClassCentroid) -> Result<Vec<f64>> {
    if x.dim() != z.dim() {
        return Err(Error::shape(z.dim(), x.dim()));
    }
    Ok(x.values().iter().zip(&z.mean).map(|(a, b)| a + b).collect())
}

/// The positive and negative class centroids of a training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centroids {
    pub positive: ClassCentroid,
    pub negative: ClassCentroid,
}

impl Centroids {
    pub fn fit(train: &Dataset) -> Result<Self> {
        Ok(Centroids {
            positive: class_centroid(train, Label::Positive)?,
            negative: class_centroid(train, Label::Negative)?,
        })
    }

    /// All-zero centroids. With these, three-side kernels collapse to their
    /// two-side counterparts.
    pub fn zeros(dim: usize) -> Self {
        let zero = |class_label| ClassCentroid {
            class_label,
            mean: vec![0.0; dim],
            count: vec![0; dim],
        };
        Centroids {
            positive: zero(Label::Positive),
            negative: zero(Label::Negative),
        }
    }

    pub fn get(&self, label: Label) -> &ClassCentroid {
        match label {
            Label::Positive => &self.positive,
            Label::Negative => &self.negative,
        }
    }

    pub fn dim(&self) -> usize {
        self.positive.dim()
    }

    pub fn select(&self, dims: &[usize]) -> Result<Centroids> {
        Ok(Centroids {
            positive: self.positive.select(dims)?,
            negative: self.negative.select(dims)?,
        })
    }

    /// Number of (class, dimension) pairs without a single observation.
    pub fn starved_count(&self) -> usize {
        self.positive.starved_dims().len() + self.negative.starved_dims().len()
    }
}
