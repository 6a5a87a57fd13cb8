use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode};
use crate::dataset::Label;
use crate::error::{Error, Result};

pub const REPORT_FORMAT: &str = "mptkrr-experiment-report";

/// Header of the per-cell CSV.
pub const CELL_CSV_HEADER: [&str; 10] = [
    "mode",
    "rate",
    "seed",
    "accuracy",
    "tp",
    "tn",
    "fp",
    "fn",
    "degenerate_kernels",
    "ms",
];

/// Confusion counts with `+1` as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn tally(truth: &[Label], predicted: &[Label]) -> Self {
        let mut c = Confusion::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t, p) {
                (Label::Positive, Label::Positive) => c.tp += 1,
                (Label::Negative, Label::Negative) => c.tn += 1,
                (Label::Negative, Label::Positive) => c.fp += 1,
                (Label::Positive, Label::Negative) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

/// Outcome of one (mode, rate, seed) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub mode: Mode,
    pub rate: f64,
    pub seed: u64,
    pub accuracy: Option<f64>,
    pub confusion: Option<Confusion>,
    pub degenerate_kernels: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Dimensions kept by FDR selection, best first.
    pub selected_dims: Option<Vec<usize>>,
    pub ms: u64,
    /// Set when the cell failed; the other metrics are then absent.
    pub error: Option<String>,
}

impl CellResult {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Summary over seeds for one (mode, rate) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mode: Mode,
    pub rate: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation; 0 with a single seed.
    pub std: Option<f64>,
    pub median: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Aggregate {
    pub fn from_cells(mode: Mode, rate: f64, cells: &[&CellResult]) -> Self {
        let mut acc: Vec<f64> = cells.iter().filter_map(|c| c.accuracy).collect();
        let n_failed = cells.iter().filter(|c| !c.is_ok()).count();
        acc.sort_by(f64::total_cmp);
        let n = acc.len();
        let (mean, std, median, min, max) = if n == 0 {
            (None, None, None, None, None)
        } else {
            let mean = acc.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            let median = if n % 2 == 1 {
                acc[n / 2]
            } else {
                0.5 * (acc[n / 2 - 1] + acc[n / 2])
            };
            (Some(mean), Some(std), Some(median), Some(acc[0]), Some(acc[n - 1]))
        };
        Aggregate {
            mode,
            rate,
            n_ok: n,
            n_failed,
            mean,
            std,
            median,
            min,
            max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub dims: usize,
    pub positives: usize,
    pub negatives: usize,
    pub missing_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format: String,
    pub library_version: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    /// Ordered by seed, then rate, then mode, as listed in the config.
    pub cells: Vec<CellResult>,
    /// Ordered by rate, then mode.
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    pub fn aggregate(&self, mode: Mode, rate: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.mode == mode && a.rate == rate)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: ExperimentReport = serde_json::from_str(s)?;
        if r.format != REPORT_FORMAT {
            return Err(Error::ModelFormat(format!("`{}` is not an experiment report", r.format)));
        }
        Ok(r)
    }

    /// Flat per-cell CSV with the columns of [`CELL_CSV_HEADER`]. Metrics
    /// of failed cells are left empty.
    pub fn write_cells_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CELL_CSV_HEADER)?;
        for c in &self.cells {
            let conf = c.confusion;
            let num = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                c.mode.to_string(),
                c.rate.to_string(),
                c.seed.to_string(),
                c.accuracy.map(|a| a.to_string()).unwrap_or_default(),
                num(conf.map(|c| c.tp)),
                num(conf.map(|c| c.tn)),
                num(conf.map(|c| c.fp)),
                num(conf.map(|c| c.fn_)),
                c.degenerate_kernels.to_string(),
                c.ms.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}
