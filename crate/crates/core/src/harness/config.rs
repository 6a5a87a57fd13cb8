use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::CsvOptions;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::krr::{FeatureSelection, FitConfig, Solver, TrainingGram, DEFAULT_RHO};

/// Training/testing completeness. The first letter is the training phase,
/// the second the testing phase; `I` = incomplete (masked), `C` = complete.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    II,
    IC,
    CI,
    CC,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::II, Mode::IC, Mode::CI, Mode::CC];

    pub fn train_incomplete(self) -> bool {
        matches!(self, Mode::II | Mode::IC)
    }

    pub fn test_incomplete(self) -> bool {
        matches!(self, Mode::II | Mode::CI)
    }

    pub(crate) fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "II" => Ok(Mode::II),
            "IC" => Ok(Mode::IC),
            "CI" => Ok(Mode::CI),
            "CC" => Ok(Mode::CC),
            _ => Err(Error::param("mode", format!("`{s}` is not one of II, IC, CI, CC"))),
        }
    }
}

/// Where the experiment data comes from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSource {
    pub path: PathBuf,
    #[serde(flatten)]
    pub csv: CsvOptions,
}

/// One experiment: a dataset, a kernel/solver choice, and the sweep axes
/// (seeds × missing rates × modes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Method label used by comparisons.
    pub name: Option<String>,
    pub dataset: DatasetSource,
    pub train_fraction: f64,
    pub missing_rates: Vec<f64>,
    pub modes: Vec<Mode>,
    pub kernel: KernelSpec,
    pub solver: Solver,
    pub training_gram: TrainingGram,
    pub rho: f64,
    pub top_k: FeatureSelection,
    pub seeds: Vec<u64>,
    /// Cap on training rows after splitting.
    pub subsample: Option<usize>,
    /// Cap on test rows after splitting.
    pub test_subsample: Option<usize>,
    /// Record per-cell wall time. Off by default so that reports are
    /// byte-identical across runs.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: None,
            dataset: DatasetSource::default(),
            train_fraction: 0.8,
            missing_rates: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            modes: Mode::ALL.to_vec(),
            kernel: KernelSpec::default(),
            solver: Solver::Auto,
            training_gram: TrainingGram::Asymmetric,
            rho: DEFAULT_RHO,
            top_k: FeatureSelection::Auto,
            seeds: vec![0],
            subsample: None,
            test_subsample: None,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&s)?)
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            kernel: self.kernel,
            rho: self.rho,
            solver: self.solver,
            training_gram: self.training_gram,
            top_k: self.top_k,
        }
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.kernel.family.to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::Config("at least one mode is required".into()));
        }
        if self.missing_rates.is_empty() {
            return Err(Error::Config("at least one missing rate is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if let Some(r) = self.missing_rates.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(Error::param("missing_rates", format!("{r} is outside [0, 1)")));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::param("rho", format!("{} must be positive", self.rho)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::param(
                "train_fraction",
                format!("{} is not strictly between 0 and 1", self.train_fraction),
            ));
        }
        if self.subsample == Some(0) || self.test_subsample == Some(0) {
            return Err(Error::param("subsample", "row caps must be positive"));
        }
        self.kernel.validate()
    }
}
