use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solve::{fit_empirical, fit_intrinsic};
use crate::centroids::{centroid_augment, Centroids};
use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::kernels::{gram, right_symmetric_gram, unit, KernelFamily, KernelSpec, SampleSet, Side};
use crate::masking::MaskedVector;
use crate::stats::{dataset_fdr, select_top_k};

/// Ridge parameter used throughout the reference experiments.
pub const DEFAULT_RHO: f64 = 5.0;

/// Upper bound on the number of FDR-selected dimensions in `auto` mode.
pub const DEFAULT_TOP_K: usize = 200;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Intrinsic,
    Empirical,
    /// Intrinsic when the family has a finite map and N exceeds the
    /// feature dimension, empirical otherwise.
    #[default]
    Auto,
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intrinsic" => Ok(Solver::Intrinsic),
            "empirical" => Ok(Solver::Empirical),
            "auto" => Ok(Solver::Auto),
            other => Err(Error::param("solver", format!("unknown solver `{other}`"))),
        }
    }
}

/// How the empirical-space training matrix is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingGram {
    /// `K[i][j] = k(x_i, x_j)` with `x_j`'s class centroid on the right;
    /// asymmetric for three-side kernels.
    #[default]
    Asymmetric,
    /// Both slots centroid-augmented; symmetric for every family.
    RightSymmetric,
}

impl FromStr for TrainingGram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "asymmetric" => Ok(TrainingGram::Asymmetric),
            "right-symmetric" => Ok(TrainingGram::RightSymmetric),
            other => Err(Error::param("training_gram", format!("unknown variant `{other}`"))),
        }
    }
}

/// FDR-based dimension selection before fitting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SelectionRepr", into = "SelectionRepr")]
pub enum FeatureSelection {
    /// Keep the top `min(200, M)` dimensions, but only when M > N.
    #[default]
    Auto,
    Off,
    /// Keep the top `min(k, M)` dimensions.
    TopK(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SelectionRepr {
    Count(usize),
    Word(String),
}

impl TryFrom<SelectionRepr> for FeatureSelection {
    type Error = String;

    fn try_from(r: SelectionRepr) -> std::result::Result<Self, String> {
        match r {
            SelectionRepr::Count(k) => Ok(FeatureSelection::TopK(k)),
            SelectionRepr::Word(w) => w.parse().map_err(|e: Error| e.to_string()),
        }
    }
}

impl From<FeatureSelection> for SelectionRepr {
    fn from(s: FeatureSelection) -> Self {
        match s {
            FeatureSelection::TopK(k) => SelectionRepr::Count(k),
            other => SelectionRepr::Word(other.to_string()),
        }
    }
}

impl fmt::Display for FeatureSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSelection::Auto => f.write_str("auto"),
            FeatureSelection::Off => f.write_str("off"),
            FeatureSelection::TopK(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for FeatureSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(FeatureSelection::Auto),
            "off" | "none" => Ok(FeatureSelection::Off),
            k => k
                .parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .map(FeatureSelection::TopK)
                .ok_or_else(|| Error::param("top_k", format!("`{s}` is not auto, off or a positive count"))),
        }
    }
}

impl FeatureSelection {
    /// Number of dimensions to keep for an N × M training set, if any.
    pub fn resolve(self, n_rows: usize, n_dims: usize) -> Option<usize> {
        match self {
            FeatureSelection::Off => None,
            FeatureSelection::Auto => (n_dims > n_rows).then(|| DEFAULT_TOP_K.min(n_dims)),
            FeatureSelection::TopK(k) => Some(k.min(n_dims)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub kernel: KernelSpec,
    pub rho: f64,
    pub solver: Solver,
    pub training_gram: TrainingGram,
    pub top_k: FeatureSelection,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            kernel: KernelSpec::default(),
            rho: DEFAULT_RHO,
            solver: Solver::Auto,
            training_gram: TrainingGram::Asymmetric,
            top_k: FeatureSelection::Auto,
        }
    }
}

/// An explicit feature vector and whether its norm guard fired.
#[derive(Clone, Debug, PartialEq)]
pub struct Mapped {
    pub phi: Vec<f64>,
    pub degenerate: bool,
}

/// Explicit finite feature maps.
///
/// Cosine: `x̃ / ‖x̃‖` on either side. MPT-Linear: the left map is
/// `x̃ / ‖x̃‖`, the right map is `(x̃ + z̃_q) / ‖x̃ + z̃_q‖` with `q` the
/// sample's class, so `φ_L(a)ᵀφ_R(b)` is exactly the three-side cosine.
/// A zero-norm input maps to the zero vector.
pub fn intrinsic_feature_map(
    x: &MaskedVector,
    side: Side,
    label: Option<Label>,
    centroids: &Centroids,
    spec: &KernelSpec,
) -> Result<Mapped> {
    let raw = match (spec.family, side) {
        (KernelFamily::Cosine, _) | (KernelFamily::MptLinear, Side::Left) => x.values().to_vec(),
        (KernelFamily::MptLinear, Side::Right) => {
            let label = label.ok_or(Error::PhaseMisuse("right-hand MPT feature map"))?;
            centroid_augment(x, centroids.get(label))?
        }
        (family, _) => {
            return Err(Error::Config(format!(
                "{family} has no explicit finite feature map; use the empirical solver"
            )))
        }
    };
    Ok(match unit(&raw, spec.eps) {
        Some(phi) => Mapped {
            phi,
            degenerate: false,
        },
        None => Mapped {
            phi: vec![0.0; raw.len()],
            degenerate: true,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "lowercase")]
pub enum Weights {
    Intrinsic {
        u: Vec<f64>,
    },
    Empirical {
        a: Vec<f64>,
        training: Vec<MaskedVector>,
        labels: Vec<Label>,
        training_gram: TrainingGram,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub n_train: usize,
    /// Normwise relative residual of the defining linear system.
    pub residual: f64,
    /// Zero-norm guards fired while building training features or Gram.
    pub degenerate_kernels: usize,
    /// (class, dimension) pairs with no observed training entry.
    pub starved_centroid_dims: usize,
    /// Whether the training Gram was symmetric (empirical space only).
    pub symmetric_gram: Option<bool>,
}

/// A fitted classifier: kernel, selected dimensions, frozen centroids and
/// the solved weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrrModel {
    pub kernel: KernelSpec,
    pub rho: f64,
    pub input_dims: usize,
    pub selected_dims: Option<Vec<usize>>,
    /// Centroids over the selected dimensions.
    pub centroids: Centroids,
    pub bias: f64,
    pub weights: Weights,
    pub diagnostics: FitDiagnostics,
}

/// Scores for a batch of inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Scores {
    pub scores: Vec<f64>,
    pub degenerate: usize,
}

impl Scores {
    pub fn labels(&self) -> Vec<Label> {
        self.scores.iter().map(|&s| Label::from_score(s)).collect()
    }
}

fn targets(labels: &[Label]) -> Vec<f64> {
    labels.iter().map(|l| l.target()).collect()
}

impl KrrModel {
    pub fn fit(train: &Dataset, cfg: &FitConfig) -> Result<KrrModel> {
        cfg.kernel.validate()?;
        if !(cfg.rho > 0.0 && cfg.rho.is_finite()) {
            return Err(Error::param("rho", format!("{} must be positive", cfg.rho)));
        }
        if !train.has_both_classes() {
            return Err(Error::DegenerateTarget);
        }

        let selected_dims = match cfg.top_k.resolve(train.n_rows(), train.n_dims()) {
            Some(k) => Some(select_top_k(&dataset_fdr(train), k)?),
            None => None,
        };
        let reduced;
        let train_sel = match &selected_dims {
            Some(dims) => {
                reduced = train.select_dims(dims)?;
                &reduced
            }
            None => train,
        };

        let centroids = Centroids::fit(train_sel)?;
        let family = cfg.kernel.family;
        let n = train_sel.n_rows();
        let j = train_sel.n_dims();
        let solver = match cfg.solver {
            Solver::Auto if family.has_finite_map() && n > j => Solver::Intrinsic,
            Solver::Auto => Solver::Empirical,
            Solver::Intrinsic if !family.has_finite_map() => {
                return Err(Error::Config(format!(
                    "{family} cannot run in intrinsic space; use the empirical solver"
                )))
            }
            s => s,
        };

        let y = targets(train_sel.labels());
        let vectors = train_sel.masked_rows();
        let mut diagnostics = FitDiagnostics {
            n_train: n,
            starved_centroid_dims: centroids.starved_count(),
            ..FitDiagnostics::default()
        };

        let (bias, weights) = match solver {
            Solver::Intrinsic => {
                let mapped: Vec<Mapped> = vectors
                    .iter()
                    .zip(train_sel.labels())
                    .map(|(x, &l)| intrinsic_feature_map(x, Side::Right, Some(l), &centroids, &cfg.kernel))
                    .collect::<Result<_>>()?;
                diagnostics.degenerate_kernels = mapped.iter().filter(|m| m.degenerate).count();
                let phi = DMatrix::from_row_iterator(n, j, mapped.iter().flat_map(|m| m.phi.iter().copied()));
                let fit = fit_intrinsic(&phi, &y, cfg.rho)?;
                diagnostics.residual = fit.residual;
                (fit.b, Weights::Intrinsic { u: fit.u })
            }
            Solver::Empirical | Solver::Auto => {
                let set = SampleSet::labeled(&vectors, train_sel.labels());
                let k = match cfg.training_gram {
                    TrainingGram::Asymmetric => gram(set, set, Some(&centroids), &cfg.kernel)?,
                    TrainingGram::RightSymmetric => right_symmetric_gram(set, Some(&centroids), &cfg.kernel)?,
                };
                diagnostics.degenerate_kernels = k.degenerate;
                diagnostics.symmetric_gram = Some(k.is_symmetric(0.0));
                let fit = fit_empirical(&k.entries, &y, cfg.rho)?;
                diagnostics.residual = fit.residual.max(fit.stationarity);
                (
                    fit.b,
                    Weights::Empirical {
                        a: fit.a,
                        training: vectors,
                        labels: train_sel.labels().to_vec(),
                        training_gram: cfg.training_gram,
                    },
                )
            }
        };

        Ok(KrrModel {
            kernel: cfg.kernel,
            rho: cfg.rho,
            input_dims: train.n_dims(),
            selected_dims,
            centroids,
            bias,
            weights,
            diagnostics,
        })
    }

    pub fn is_intrinsic(&self) -> bool {
        matches!(self.weights, Weights::Intrinsic { .. })
    }

    fn restrict(&self, x: &MaskedVector) -> Result<MaskedVector> {
        if x.dim() != self.input_dims {
            return Err(Error::shape(self.input_dims, x.dim()));
        }
        match &self.selected_dims {
            Some(dims) => x.select(dims),
            None => Ok(x.clone()),
        }
    }

    /// Decision scores for many inputs; rows are scored in parallel.
    pub fn score_batch(&self, xs: &[MaskedVector]) -> Result<Scores> {
        let xs: Vec<MaskedVector> = xs.iter().map(|x| self.restrict(x)).collect::<Result<_>>()?;
        match &self.weights {
            Weights::Intrinsic { u } => {
                let per_row: Vec<(f64, bool)> = xs
                    .par_iter()
                    .map(|x| {
                        let m = intrinsic_feature_map(x, Side::Left, None, &self.centroids, &self.kernel)?;
                        let s = m.phi.iter().zip(u).map(|(p, w)| p * w).sum::<f64>() + self.bias;
                        Ok((s, m.degenerate))
                    })
                    .collect::<Result<_>>()?;
                Ok(Scores {
                    degenerate: per_row.iter().filter(|(_, d)| *d).count(),
                    scores: per_row.into_iter().map(|(s, _)| s).collect(),
                })
            }
            Weights::Empirical {
                a, training, labels, ..
            } => {
                let k = gram(
                    SampleSet::unlabeled(&xs),
                    SampleSet::labeled(training, labels),
                    Some(&self.centroids),
                    &self.kernel,
                )?;
                let av = nalgebra::DVector::from_column_slice(a);
                let scores = (&k.entries * av).iter().map(|s| s + self.bias).collect();
                Ok(Scores {
                    scores,
                    degenerate: k.degenerate,
                })
            }
        }
    }

    /// Decision score `uᵀφ(x) + b` or `Σ_j a_j k(x, x_j) + b`.
    pub fn predict(&self, x: &MaskedVector) -> Result<f64> {
        Ok(self.score_batch(std::slice::from_ref(x))?.scores[0])
    }

    pub fn classify(&self, x: &MaskedVector) -> Result<Label> {
        self.predict(x).map(Label::from_score)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFileRef {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            model: self,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<KrrModel> {
        let file: ModelFile = serde_json::from_str(s)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!("unexpected format tag `{}`", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version {} (this build reads {MODEL_VERSION})",
                file.version
            )));
        }
        Ok(file.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<KrrModel> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        KrrModel::from_json(&s)
    }
}

const MODEL_FORMAT: &str = "mptkrr-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize)]
struct ModelFileRef<'a> {
    format: &'a str,
    version: u32,
    model: &'a KrrModel,
}

#[derive(Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: KrrModel,
}
