//! Labeled two-class datasets with per-entry presence, CSV I/O and seeded
//! splitting.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masking::{to_masked, MaskedVector};

/// Class label of a sample. Regression targets are `+1.0` / `-1.0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "+1")]
    Positive,
    #[serde(rename = "-1")]
    Negative,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Positive, Label::Negative];

    pub fn target(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    /// Sign rule; a score of exactly zero is classified positive.
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        })
    }
}

/// Original label strings, kept so a dataset can be written back out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassNames {
    pub positive: String,
    pub negative: String,
}

/// N samples × M dimensions, labels in {+1, −1}, presence per entry.
///
/// Storage is row-major. A feature value whose presence bit is false is
/// always stored as `0.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n_dims: usize,
    features: Vec<f64>,
    presence: Vec<bool>,
    labels: Vec<Label>,
    dim_names: Option<Vec<String>>,
    class_names: Option<ClassNames>,
}

impl Dataset {
    /// Builds a dataset from row-major `features` and `presence`.
    /// Values at missing positions are overwritten with zero.
    pub fn new(
        n_dims: usize,
        mut features: Vec<f64>,
        presence: Vec<bool>,
        labels: Vec<Label>,
    ) -> Result<Self> {
        let cells = labels.len() * n_dims;
        if features.len() != cells {
            return Err(Error::shape(cells, features.len()));
        }
        if presence.len() != cells {
            return Err(Error::shape(cells, presence.len()));
        }
        for (v, &p) in features.iter_mut().zip(&presence) {
            if !p {
                *v = 0.0;
            }
        }
        Ok(Dataset {
            n_dims,
            features,
            presence,
            labels,
            dim_names: None,
            class_names: None,
        })
    }

    /// Convenience constructor; `None` marks a missing entry.
    pub fn from_rows(rows: &[Vec<Option<f64>>], labels: Vec<Label>) -> Result<Self> {
        let n_dims = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * n_dims);
        let mut presence = Vec::with_capacity(rows.len() * n_dims);
        for row in rows {
            if row.len() != n_dims {
                return Err(Error::shape(n_dims, row.len()));
            }
            for cell in row {
                features.push(cell.unwrap_or(0.0));
                presence.push(cell.is_some());
            }
        }
        Dataset::new(n_dims, features, presence, labels)
    }

    pub fn with_dim_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_dims {
            return Err(Error::shape(self.n_dims, names.len()));
        }
        self.dim_names = Some(names);
        Ok(self)
    }

    pub fn with_class_names(mut self, names: ClassNames) -> Self {
        self.class_names = Some(names);
        self
    }

    /// Same rows and labels with a new presence matrix.
    pub fn with_presence(&self, presence: Vec<bool>) -> Result<Self> {
        let mut out = Dataset::new(self.n_dims, self.features.clone(), presence, self.labels.clone())?;
        out.dim_names = self.dim_names.clone();
        out.class_names = self.class_names.clone();
        Ok(out)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> Label {
        self.labels[row]
    }

    pub fn presence(&self) -> &[bool] {
        &self.presence
    }

    pub fn dim_names(&self) -> Option<&[String]> {
        self.dim_names.as_deref()
    }

    pub fn class_names(&self) -> Option<&ClassNames> {
        self.class_names.as_ref()
    }

    pub fn row_values(&self, row: usize) -> &[f64] {
        &self.features[row * self.n_dims..(row + 1) * self.n_dims]
    }

    pub fn row_mask(&self, row: usize) -> &[bool] {
        &self.presence[row * self.n_dims..(row + 1) * self.n_dims]
    }

    pub fn masked_row(&self, row: usize) -> MaskedVector {
        to_masked(self.row_values(row), self.row_mask(row)).expect("row slices share a length")
    }

    pub fn masked_rows(&self) -> Vec<MaskedVector> {
        (0..self.n_rows()).map(|r| self.masked_row(r)).collect()
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count_label(Label::Positive) > 0 && self.count_label(Label::Negative) > 0
    }

    /// Fraction of cells whose presence bit is false.
    pub fn missing_fraction(&self) -> f64 {
        if self.presence.is_empty() {
            return 0.0;
        }
        self.presence.iter().filter(|&&p| !p).count() as f64 / self.presence.len() as f64
    }

    /// Rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let m = self.n_dims;
        let mut features = Vec::with_capacity(rows.len() * m);
        let mut presence = Vec::with_capacity(rows.len() * m);
        for &r in rows {
            features.extend_from_slice(self.row_values(r));
            presence.extend_from_slice(self.row_mask(r));
        }
        Dataset {
            n_dims: m,
            features,
            presence,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            dim_names: self.dim_names.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Columns in the given order.
    pub fn select_dims(&self, dims: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = dims.iter().find(|&&d| d >= self.n_dims) {
            return Err(Error::shape(self.n_dims, bad + 1));
        }
        let mut features = Vec::with_capacity(self.n_rows() * dims.len());
        let mut presence = Vec::with_capacity(self.n_rows() * dims.len());
        for r in 0..self.n_rows() {
            let (vals, mask) = (self.row_values(r), self.row_mask(r));
            for &d in dims {
                features.push(vals[d]);
                presence.push(mask[d]);
            }
        }
        Ok(Dataset {
            n_dims: dims.len(),
            features,
            presence,
            labels: self.labels.clone(),
            dim_names: self
                .dim_names
                .as_ref()
                .map(|names| dims.iter().map(|&d| names[d].clone()).collect()),
            class_names: self.class_names.clone(),
        })
    }
}

/// Parsing options for delimited input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvOptions {
    pub has_header: bool,
    pub label_column: usize,
    pub missing_tokens: Vec<String>,
    pub positive_label: String,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: false,
            label_column: 0,
            missing_tokens: default_missing_tokens(),
            positive_label: "1".to_string(),
        }
    }
}

pub fn default_missing_tokens() -> Vec<String> {
    vec![String::new(), "?".to_string(), "NaN".to_string()]
}

/// Feature rows read from CSV, with the raw label strings when a label
/// column was requested.
#[derive(Clone, Debug)]
pub struct FeatureTable {
    pub rows: Vec<MaskedVector>,
    pub dim_names: Option<Vec<String>>,
    pub label_name: Option<String>,
    pub raw_labels: Option<Vec<String>>,
}

/// Reads numeric feature rows; `label_column`, when given, is split off and
/// returned verbatim.
pub fn read_feature_table<R: Read>(
    reader: R,
    has_header: bool,
    label_column: Option<usize>,
    missing_tokens: &[String],
) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut width: Option<usize> = None;
    let mut header: Option<csv::StringRecord> = None;
    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();

    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row: line,
                column: None,
                reason: format!("expected {expected} columns, found {}", record.len()),
            });
        }
        if let Some(lc) = label_column {
            if lc >= expected {
                return Err(Error::Parse {
                    row: line,
                    column: Some(lc + 1),
                    reason: format!("label column {lc} is outside a {expected}-column row"),
                });
            }
        }
        if has_header && header.is_none() {
            header = Some(record);
            continue;
        }

        let mut values = Vec::with_capacity(expected);
        let mut mask = Vec::with_capacity(expected);
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == label_column {
                raw_labels.push(cell.to_string());
                continue;
            }
            if missing_tokens.iter().any(|t| t == cell) {
                values.push(0.0);
                mask.push(false);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    values.push(v);
                    mask.push(true);
                }
                _ => {
                    return Err(Error::Parse {
                        row: line,
                        column: Some(col + 1),
                        reason: format!("`{cell}` is neither a finite number nor a missing token"),
                    })
                }
            }
        }
        rows.push(to_masked(&values, &mask)?);
    }

    let (dim_names, label_name) = match header {
        Some(h) => {
            let mut dims = Vec::new();
            let mut label = None;
            for (col, name) in h.iter().enumerate() {
                if Some(col) == label_column {
                    label = Some(name.to_string());
                } else {
                    dims.push(name.to_string());
                }
            }
            (Some(dims), label)
        }
        None => (None, None),
    };

    Ok(FeatureTable {
        rows,
        dim_names,
        label_name,
        raw_labels: label_column.map(|_| raw_labels),
    })
}

/// Maps raw label strings onto {+1, −1}. Exactly two distinct values are
/// required and one of them must equal `positive`.
pub fn encode_labels(raw: &[String], positive: &str) -> Result<(Vec<Label>, ClassNames)> {
    let distinct: BTreeSet<&str> = raw.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(Error::LabelCardinality {
            found: distinct.len(),
            values: distinct.iter().map(|s| s.to_string()).collect(),
        });
    }
    if !distinct.contains(positive) {
        return Err(Error::param(
            "positive_label",
            format!("`{positive}` is not one of {distinct:?}"),
        ));
    }
    let negative = distinct
        .iter()
        .find(|&&s| s != positive)
        .expect("two distinct values")
        .to_string();
    let labels = raw
        .iter()
        .map(|s| if s == positive { Label::Positive } else { Label::Negative })
        .collect();
    Ok((
        labels,
        ClassNames {
            positive: positive.to_string(),
            negative,
        },
    ))
}

/// Parses a labeled dataset from any reader.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let table = read_feature_table(
        reader,
        opts.has_header,
        Some(opts.label_column),
        &opts.missing_tokens,
    )?;
    let raw = table.raw_labels.unwrap_or_default();
    let (labels, names) = encode_labels(&raw, &opts.positive_label)?;
    let n_dims = table.rows.first().map_or(0, MaskedVector::dim);
    let mut features = Vec::with_capacity(table.rows.len() * n_dims);
    let mut presence = Vec::with_capacity(table.rows.len() * n_dims);
    for row in &table.rows {
        features.extend_from_slice(row.values());
        presence.extend_from_slice(row.mask());
    }
    let mut d = Dataset::new(n_dims, features, presence, labels)?.with_class_names(names);
    if let Some(dims) = table.dim_names {
        d = d.with_dim_names(dims)?;
    }
    Ok(d)
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), opts)
}

/// Writes the dataset back as CSV. The label goes to `label_column`
/// (clamped to the row width); missing cells are written as `missing_token`.
/// Feature values use the shortest representation that parses back to the
/// same `f64`.
pub fn write_csv<W: Write>(
    d: &Dataset,
    writer: W,
    label_column: usize,
    missing_token: &str,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let label_at = label_column.min(d.n_dims());
    if let Some(names) = d.dim_names() {
        let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
        header.insert(label_at, "label");
        w.write_record(&header)?;
    }
    let (pos, neg) = match d.class_names() {
        Some(c) => (c.positive.clone(), c.negative.clone()),
        None => ("1".to_string(), "-1".to_string()),
    };
    for r in 0..d.n_rows() {
        let mut cells: Vec<String> = d
            .row_values(r)
            .iter()
            .zip(d.row_mask(r))
            .map(|(v, &m)| if m { v.to_string() } else { missing_token.to_string() })
            .collect();
        let label = match d.label(r) {
            Label::Positive => pos.clone(),
            Label::Negative => neg.clone(),
        };
        cells.insert(label_at, label);
        w.write_record(&cells)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Fraction of rows used for training, and the shuffle seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    train_fraction: f64,
    seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::param(
                "train_fraction",
                format!("{train_fraction} is not strictly between 0 and 1"),
            ));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
        })
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

const MAX_SPLIT_ATTEMPTS: usize = 100;

/// Uniform row-level split. Redraws (up to a bounded number of attempts)
/// until the training side holds both classes. Rows keep their original
/// relative order on each side.
pub fn split(d: &Dataset, s: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let n = d.n_rows();
    let n_train = (s.train_fraction * n as f64).round() as usize;
    if n < 2 || n_train == 0 || n_train >= n {
        return Err(Error::DegenerateSplit(format!(
            "{n} rows at fraction {} leave an empty side",
            s.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        order.shuffle(&mut rng);
        let mut train_idx = order[..n_train].to_vec();
        let has = |l: Label| train_idx.iter().any(|&r| d.label(r) == l);
        if has(Label::Positive) && has(Label::Negative) {
            train_idx.sort_unstable();
            let mut test_idx = order[n_train..].to_vec();
            test_idx.sort_unstable();
            return Ok((d.select_rows(&train_idx), d.select_rows(&test_idx)));
        }
    }
    Err(Error::DegenerateSplit(format!(
        "no draw in {MAX_SPLIT_ATTEMPTS} attempts put both classes in the training side"
    )))
}

/// Keeps at most `max_rows` rows chosen uniformly with `seed`; identity when
/// the dataset is already small enough.
pub fn subsample(d: &Dataset, max_rows: usize, seed: u64) -> Dataset {
    if max_rows >= d.n_rows() {
        return d.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, d.n_rows(), max_rows).into_vec();
    idx.sort_unstable();
    d.select_rows(&idx)
}
