//! Classification of incomplete data with asymmetric imputation kernels.
//!
//! Samples whose attributes are missing (or deliberately masked) are
//! compared with *three-side* similarities: a test vector is matched
//! against a training vector **and** the centroid of that training vector's
//! class. Adding the class centroid to the training vector fills its missing
//! entries with class-dependent averages and injects class information into
//! the kernel matrix without any clustering step. The resulting kernels are
//! asymmetric; they are solved with Kernel Ridge Regression in either
//! intrinsic or empirical space.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`dataset`] | CSV loading, labels in {+1, −1}, seeded train/test split |
//! | [`masking`] | zero-padding, double masks, synthetic missingness |
//! | [`stats`] | streaming moments, Partial Fisher Discriminant Ratios, top-k selection |
//! | [`centroids`] | class centroids over observed entries |
//! | [`kernels`] | cosine, MPC, MPP, MPT (linear/poly/RBF), Gram assembly |
//! | [`krr`] | intrinsic and empirical KRR, prediction, model files |
//! | [`harness`] | missing-rate sweeps over II/IC/CI/CC modes, reports, comparisons |
//!
//! ```
//! use mptkrr::{Dataset, Label, FitConfig, KrrModel, MaskedVector};
//!
//! let train = Dataset::from_rows(
//!     &[
//!         vec![Some(2.0), Some(0.1)],
//!         vec![Some(1.9), None],
//!         vec![Some(0.2), Some(2.1)],
//!         vec![None, Some(1.8)],
//!     ],
//!     vec![Label::Positive, Label::Positive, Label::Negative, Label::Negative],
//! )?;
//! let model = KrrModel::fit(&train, &FitConfig::default())?;
//! let probe = mptkrr::to_masked(&[2.0, 0.0], &[true, false])?;
//! assert_eq!(model.classify(&probe)?, Label::Positive);
//! # Ok::<(), mptkrr::Error>(())
//! ```
//!
//! The `book/` directory next to this crate walks through each concept with
//! runnable snippets; every snippet is compiled and run as a doc-test of
//! this crate.

pub mod centroids;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod krr;
pub mod masking;
pub mod stats;

pub use centroids::{centroid_augment, class_centroid, Centroids, ClassCentroid};
pub use dataset::{load_csv, split, CsvOptions, Dataset, Label, SplitSpec};
pub use error::{Error, Result};
pub use harness::{compare, run_experiment, run_experiment_on, ExperimentConfig, ExperimentReport, Mode};
pub use kernels::{
    cosine, gram, masked_poly, masked_rbf, mpc, mpp, mpt_linear, mpt_poly, mpt_rbf, GramMatrix,
    KernelFamily, KernelSpec, SampleSet, Side,
};
pub use krr::{
    fit_empirical, fit_intrinsic, FeatureSelection, FitConfig, KrrModel, Solver, TrainingGram,
};
pub use masking::{double_mask, inject_missing, to_masked, MaskedVector, MissingSpec};
pub use stats::{incremental_mean, partial_fdr, partial_moments, select_top_k, FdrReport, RunningMoments};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/masking.md")]
    mod masking {}
    #[doc = include_str!("../../../book/src/fisher_ratio.md")]
    mod fisher_ratio {}
    #[doc = include_str!("../../../book/src/three_side_kernels.md")]
    mod three_side_kernels {}
    #[doc = include_str!("../../../book/src/ridge_regression.md")]
    mod ridge_regression {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
