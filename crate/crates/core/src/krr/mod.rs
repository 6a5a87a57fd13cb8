//! Kernel Ridge Regression in intrinsic space (explicit feature vectors,
//! a (J+1)-dimensional system) and empirical space (an N × N kernel
//! matrix), with sign-based classification.

mod model;
mod solve;

pub use model::{
    intrinsic_feature_map, FeatureSelection, FitConfig, FitDiagnostics, KrrModel, Mapped, Scores,
    Solver, TrainingGram, Weights, DEFAULT_RHO, DEFAULT_TOP_K,
};
pub use solve::{fit_empirical, fit_intrinsic, EmpiricalFit, IntrinsicFit, CONDITION_LIMIT, RESIDUAL_TOL};
