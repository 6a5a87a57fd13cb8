use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::Mode;
use super::report::ExperimentReport;
use crate::error::{Error, Result};

/// Mean accuracy per method at one (mode, rate) point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub mode: Mode,
    pub rate: f64,
    /// Mean accuracy of each method, in [`Comparison::methods`] order.
    pub accuracy: Vec<Option<f64>>,
    /// Seed standard deviation of each method.
    pub std: Vec<Option<f64>>,
    /// `accuracy[i] − accuracy[0]`.
    pub diff_vs_first: Vec<Option<f64>>,
}

/// Side-by-side accuracies of several reports over a shared rate × mode grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub methods: Vec<String>,
    pub modes: Vec<Mode>,
    pub rates: Vec<f64>,
    pub rows: Vec<ComparisonRow>,
}

/// Aligns labeled reports on their common axes. All reports must share the
/// same missing rates and modes.
pub fn compare(reports: &[(String, &ExperimentReport)]) -> Result<Comparison> {
    let (_, first) = reports
        .first()
        .ok_or_else(|| Error::Comparison("nothing to compare".into()))?;
    let rates = first.config.missing_rates.clone();
    let modes = first.config.modes.clone();
    for (name, r) in &reports[1..] {
        if r.config.missing_rates != rates {
            return Err(Error::Comparison(format!(
                "`{name}` uses rates {:?}, expected {rates:?}",
                r.config.missing_rates
            )));
        }
        let (mut a, mut b) = (r.config.modes.clone(), modes.clone());
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::Comparison(format!(
                "`{name}` uses modes {:?}, expected {modes:?}",
                r.config.modes
            )));
        }
    }

    let mut rows = Vec::with_capacity(rates.len() * modes.len());
    for &mode in &modes {
        for &rate in &rates {
            let aggs: Vec<_> = reports.iter().map(|(_, r)| r.aggregate(mode, rate)).collect();
            let accuracy: Vec<Option<f64>> = aggs.iter().map(|a| a.and_then(|a| a.mean)).collect();
            let base = accuracy[0];
            rows.push(ComparisonRow {
                mode,
                rate,
                std: aggs.iter().map(|a| a.and_then(|a| a.std)).collect(),
                diff_vs_first: accuracy
                    .iter()
                    .map(|a| a.zip(base).map(|(x, b)| x - b))
                    .collect(),
                accuracy,
            });
        }
    }
    Ok(Comparison {
        methods: reports.iter().map(|(n, _)| n.clone()).collect(),
        modes,
        rates,
        rows,
    })
}

impl Comparison {
    pub fn row(&self, mode: Mode, rate: f64) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.mode == mode && r.rate == rate)
    }

    /// Long-form plot data: `mode,rate,method,accuracy,std`.
    pub fn write_plot_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["mode", "rate", "method", "accuracy", "std"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            for (i, method) in self.methods.iter().enumerate() {
                w.write_record([
                    row.mode.to_string(),
                    row.rate.to_string(),
                    method.clone(),
                    opt(row.accuracy[i]),
                    opt(row.std[i]),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    /// One table per mode: rates as columns (in percent), methods as rows,
    /// accuracies in percent with two decimals.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for &mode in &self.modes {
            let _ = writeln!(out, "Mode {mode}\n");
            let _ = write!(out, "| Missing rate (%) |");
            for r in &self.rates {
                let _ = write!(out, " {:.0} |", r * 100.0);
            }
            let _ = write!(out, "\n|---|");
            for _ in &self.rates {
                let _ = write!(out, "---|");
            }
            out.push('\n');
            for (i, method) in self.methods.iter().enumerate() {
                let _ = write!(out, "| {method} (%) |");
                for &rate in &self.rates {
                    match self.row(mode, rate).and_then(|r| r.accuracy[i]) {
                        Some(a) => {
                            let _ = write!(out, " {:.2} |", a * 100.0);
                        }
                        None => out.push_str(" – |"),
                    }
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}
