//! Experiment runner: seeds × missing rates × modes sweeps over a single
//! dataset, with JSON/CSV reports and side-by-side comparisons.

mod compare;
mod config;
mod report;

use std::time::Instant;

use rayon::prelude::*;

pub use compare::{compare, Comparison, ComparisonRow};
pub use config::{DatasetSource, ExperimentConfig, Mode};
pub use report::{
    Aggregate, CellResult, Confusion, DatasetSummary, ExperimentReport, CELL_CSV_HEADER,
    REPORT_FORMAT,
};

use crate::dataset::{load_csv, split, subsample, Dataset, Label, SplitSpec};
use crate::error::{Error, Result};
use crate::krr::{FitConfig, KrrModel};
use crate::masking::{inject_missing, MissingSpec};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MPTKRR_THREADS";

/// What a derived seed is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Split,
    TrainSubsample,
    TestSubsample,
    TrainMask,
    TestMask,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable seed for one use inside one cell. Splits and subsamples depend
/// only on the master seed, so every rate and mode sees the same rows;
/// masks also depend on the rate index and mode, and train and test masks
/// never share a seed.
pub fn derive_seed(master: u64, purpose: Purpose, rate_index: usize, mode: Mode) -> u64 {
    let (tag, rate, mode) = match purpose {
        Purpose::Split => (1, 0, 0),
        Purpose::TrainSubsample => (2, 0, 0),
        Purpose::TestSubsample => (3, 0, 0),
        Purpose::TrainMask => (4, rate_index as u64 + 1, mode.index() + 1),
        Purpose::TestMask => (5, rate_index as u64 + 1, mode.index() + 1),
    };
    [tag, rate, mode]
        .into_iter()
        .fold(splitmix64(master), |h, v| splitmix64(h ^ v))
}

/// Loads the configured dataset and runs the sweep.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let d = load_csv(&cfg.dataset.path, &cfg.dataset.csv)?;
    run_experiment_on(&d, cfg)
}

/// Runs the sweep on an in-memory dataset. Cells run in parallel; the
/// report lists them in config order regardless of scheduling.
pub fn run_experiment_on(d: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if !d.has_both_classes() {
        return Err(Error::DegenerateTarget);
    }

    let mut grid = Vec::new();
    for &seed in &cfg.seeds {
        for (ri, &rate) in cfg.missing_rates.iter().enumerate() {
            for &mode in &cfg.modes {
                grid.push((seed, ri, rate, mode));
            }
        }
    }
    let fit_cfg = cfg.fit_config();
    let run_all = || -> Vec<CellResult> {
        grid.par_iter()
            .map(|&(seed, ri, rate, mode)| run_cell(d, cfg, &fit_cfg, seed, ri, rate, mode))
            .collect()
    };
    let cells = match worker_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("{THREADS_ENV}: {e}")))?
            .install(run_all),
        None => run_all(),
    };

    let mut aggregates = Vec::new();
    for &rate in &cfg.missing_rates {
        for &mode in &cfg.modes {
            let group: Vec<&CellResult> = cells
                .iter()
                .filter(|c| c.mode == mode && c.rate == rate)
                .collect();
            aggregates.push(Aggregate::from_cells(mode, rate, &group));
        }
    }

    Ok(ExperimentReport {
        format: REPORT_FORMAT.to_string(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        dataset: DatasetSummary {
            rows: d.n_rows(),
            dims: d.n_dims(),
            positives: d.count_label(Label::Positive),
            negatives: d.count_label(Label::Negative),
            missing_fraction: d.missing_fraction(),
        },
        cells,
        aggregates,
    })
}

fn worker_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

struct CellOutcome {
    confusion: Confusion,
    degenerate: usize,
    n_train: usize,
    n_test: usize,
    selected_dims: Option<Vec<usize>>,
}

fn run_cell(
    d: &Dataset,
    cfg: &ExperimentConfig,
    fit_cfg: &FitConfig,
    seed: u64,
    rate_index: usize,
    rate: f64,
    mode: Mode,
) -> CellResult {
    let start = Instant::now();
    let outcome = cell_outcome(d, cfg, fit_cfg, seed, rate_index, rate, mode);
    let ms = if cfg.record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let mut cell = CellResult {
        mode,
        rate,
        seed,
        accuracy: None,
        confusion: None,
        degenerate_kernels: 0,
        n_train: 0,
        n_test: 0,
        selected_dims: None,
        ms,
        error: None,
    };
    match outcome {
        Ok(o) => {
            cell.accuracy = Some(o.confusion.accuracy());
            cell.confusion = Some(o.confusion);
            cell.degenerate_kernels = o.degenerate;
            cell.n_train = o.n_train;
            cell.n_test = o.n_test;
            cell.selected_dims = o.selected_dims;
        }
        Err(e) => cell.error = Some(format!("seed {seed}, rate {rate}, mode {mode}: {e}")),
    }
    cell
}

fn cell_outcome(
    d: &Dataset,
    cfg: &ExperimentConfig,
    fit_cfg: &FitConfig,
    seed: u64,
    ri: usize,
    rate: f64,
    mode: Mode,
) -> Result<CellOutcome> {
    let s = |p| derive_seed(seed, p, ri, mode);
    let (mut train, mut test) = split(d, &SplitSpec::new(cfg.train_fraction, s(Purpose::Split))?)?;
    if let Some(max) = cfg.subsample {
        train = subsample(&train, max, s(Purpose::TrainSubsample));
    }
    if let Some(max) = cfg.test_subsample {
        test = subsample(&test, max, s(Purpose::TestSubsample));
    }
    if mode.train_incomplete() {
        train = inject_missing(&train, &MissingSpec::new(rate, s(Purpose::TrainMask))?);
    }
    if mode.test_incomplete() {
        test = inject_missing(&test, &MissingSpec::new(rate, s(Purpose::TestMask))?);
    }

    let model = KrrModel::fit(&train, fit_cfg)?;
    let scores = model.score_batch(&test.masked_rows())?;
    Ok(CellOutcome {
        confusion: Confusion::tally(test.labels(), &scores.labels()),
        degenerate: model.diagnostics.degenerate_kernels + scores.degenerate,
        n_train: train.n_rows(),
        n_test: test.n_rows(),
        selected_dims: model.selected_dims,
    })
}
