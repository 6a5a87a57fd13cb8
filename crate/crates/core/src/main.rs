use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use mptkrr::dataset::{read_feature_table, write_csv};
use mptkrr::harness::{compare, run_experiment, ExperimentConfig, ExperimentReport, Mode};
use mptkrr::kernels::KernelFamily;
use mptkrr::krr::{FeatureSelection, FitConfig, KrrModel, Solver, TrainingGram};
use mptkrr::stats::{dataset_fdr, select_top_k};
use mptkrr::{inject_missing, load_csv, CsvOptions, Label, MissingSpec};

/// Classify incomplete data with three-side kernels and kernel ridge regression.
#[derive(Parser)]
#[command(name = "mptkrr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeds × rates × modes sweep and write the report.
    Experiment(ExperimentArgs),
    /// Train a model on a labeled CSV and save it as JSON.
    Fit(FitArgs),
    /// Score a CSV with a saved model; one output row per input row.
    Predict(PredictArgs),
    /// Partial Fisher Discriminant Ratio of every dimension, as JSON.
    Fdr(FdrArgs),
    /// Write a copy of a CSV with cells randomly masked.
    Inject(InjectArgs),
    /// Put several experiment reports side by side.
    Compare(CompareArgs),
}

#[derive(Args)]
struct CsvArgs {
    /// First row holds column names.
    #[arg(long)]
    header: bool,
    /// Zero-based index of the label column.
    #[arg(long)]
    label_column: Option<usize>,
    /// Raw label value mapped to +1.
    #[arg(long)]
    positive_label: Option<String>,
    /// Cell contents treated as missing (repeatable; default: empty, ?, NaN).
    #[arg(long = "missing-token")]
    missing_tokens: Vec<String>,
}

impl CsvArgs {
    fn apply(&self, opts: &mut CsvOptions) {
        if self.header {
            opts.has_header = true;
        }
        if let Some(c) = self.label_column {
            opts.label_column = c;
        }
        if let Some(p) = &self.positive_label {
            opts.positive_label = p.clone();
        }
        if !self.missing_tokens.is_empty() {
            opts.missing_tokens = self.missing_tokens.clone();
        }
    }

    fn options(&self) -> CsvOptions {
        let mut o = CsvOptions::default();
        self.apply(&mut o);
        o
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Kernel family, e.g. mpt-linear, mpt-poly, mpt-rbf, mpc, cosine.
    #[arg(long)]
    kernel: Option<KernelFamily>,
    /// Polynomial order.
    #[arg(long)]
    p: Option<u32>,
    /// RBF / polynomial scale τ².
    #[arg(long)]
    tau2: Option<f64>,
    /// intrinsic, empirical or auto.
    #[arg(long)]
    solver: Option<Solver>,
    /// Ridge parameter.
    #[arg(long)]
    rho: Option<f64>,
    /// FDR dimension selection: auto, off, or a count.
    #[arg(long)]
    top_k: Option<FeatureSelection>,
    /// Empirical training matrix: asymmetric or right-symmetric.
    #[arg(long)]
    training_gram: Option<TrainingGram>,
}

impl ModelArgs {
    fn apply(&self, cfg: &mut FitConfig) {
        if let Some(f) = self.kernel {
            cfg.kernel.family = f;
        }
        if let Some(p) = self.p {
            cfg.kernel.p = p;
        }
        if let Some(t) = self.tau2 {
            cfg.kernel.tau2 = t;
        }
        if let Some(s) = self.solver {
            cfg.solver = s;
        }
        if let Some(r) = self.rho {
            cfg.rho = r;
        }
        if let Some(k) = self.top_k {
            cfg.top_k = k;
        }
        if let Some(g) = self.training_gram {
            cfg.training_gram = g;
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated missing rates in [0, 1).
    #[arg(long, value_delimiter = ',', value_parser = parse_rate)]
    rates: Option<Vec<f64>>,
    /// Comma-separated modes among II, IC, CI, CC.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<Mode>>,
    /// Comma-separated master seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Cap on training rows per cell.
    #[arg(long)]
    subsample: Option<usize>,
    /// Cap on test rows per cell.
    #[arg(long)]
    test_subsample: Option<usize>,
    /// Method label used by `compare`.
    #[arg(long)]
    name: Option<String>,
    /// Record wall time per cell (reports are then no longer reproducible byte for byte).
    #[arg(long)]
    timing: bool,
    /// Report JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell CSV destination.
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

fn parse_rate(s: &str) -> Result<f64, String> {
    let r: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(0.0..1.0).contains(&r) {
        return Err(format!("{r} is outside [0, 1)"));
    }
    Ok(r)
}

#[derive(Args)]
struct FitArgs {
    /// Labeled training CSV.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Model JSON destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// CSV of feature rows.
    #[arg(long = "in")]
    input: PathBuf,
    /// First row holds column names.
    #[arg(long)]
    header: bool,
    /// Index of a label column to skip over (it is copied to the output).
    #[arg(long)]
    label_column: Option<usize>,
    #[arg(long = "missing-token")]
    missing_tokens: Vec<String>,
    /// Predictions CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FdrArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    /// Also list the top k dimensions.
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InjectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    /// Probability of masking each observed cell.
    #[arg(long, value_parser = parse_rate)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Token written for missing cells.
    #[arg(long, default_value = "")]
    missing_as: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Reports as `path` or `label=path`; the first is the reference column.
    #[arg(required = true)]
    reports: Vec<String>,
    /// Markdown table destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Long-form plot CSV destination.
    #[arg(long)]
    plot_csv: Option<PathBuf>,
    /// Comparison JSON destination.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Experiment(a) => experiment(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Fdr(a) => fdr(a),
        Command::Inject(a) => inject(a),
        Command::Compare(a) => compare_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    let mut w = output(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn experiment(a: ExperimentArgs) -> anyhow::Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_json_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = a.data {
        cfg.dataset.path = d;
    }
    if cfg.dataset.path.as_os_str().is_empty() {
        bail!("no dataset given; use --data or a config with dataset.path");
    }
    a.csv.apply(&mut cfg.dataset.csv);
    let mut fit = cfg.fit_config();
    a.model.apply(&mut fit);
    cfg.kernel = fit.kernel;
    cfg.solver = fit.solver;
    cfg.rho = fit.rho;
    cfg.top_k = fit.top_k;
    cfg.training_gram = fit.training_gram;
    if let Some(r) = a.rates {
        cfg.missing_rates = r;
    }
    if let Some(m) = a.modes {
        cfg.modes = m;
    }
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    if let Some(f) = a.train_fraction {
        cfg.train_fraction = f;
    }
    if a.subsample.is_some() {
        cfg.subsample = a.subsample;
    }
    if a.test_subsample.is_some() {
        cfg.test_subsample = a.test_subsample;
    }
    if a.name.is_some() {
        cfg.name = a.name;
    }
    if a.timing {
        cfg.record_timing = true;
    }

    let report = run_experiment(&cfg)?;
    let failed = report.cells.iter().filter(|c| !c.is_ok()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} cells failed", report.cells.len());
    }
    write_text(a.out.as_deref(), &report.to_json()?)?;
    if let Some(p) = a.csv_out {
        let file = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        report.write_cells_csv(BufWriter::new(file))?;
    }
    Ok(())
}

fn fit(a: FitArgs) -> anyhow::Result<()> {
    let d = load_csv(&a.input, &a.csv.options())?;
    let mut cfg = FitConfig::default();
    a.model.apply(&mut cfg);
    let model = KrrModel::fit(&d, &cfg)?;
    model.save(&a.out)?;
    eprintln!(
        "fitted {} on {} rows ({} space, residual {:.2e})",
        model.kernel.family,
        d.n_rows(),
        if model.is_intrinsic() { "intrinsic" } else { "empirical" },
        model.diagnostics.residual
    );
    Ok(())
}

fn predict(a: PredictArgs) -> anyhow::Result<()> {
    let model = KrrModel::load(&a.model)?;
    let tokens = if a.missing_tokens.is_empty() {
        mptkrr::dataset::default_missing_tokens()
    } else {
        a.missing_tokens
    };
    let file = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let table = read_feature_table(BufReader::new(file), a.header, a.label_column, &tokens)?;
    let scores = model.score_batch(&table.rows)?;

    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    let mut header = vec!["row", "score", "prediction"];
    if table.raw_labels.is_some() {
        header.push("label");
    }
    w.write_record(&header)?;
    for (i, &s) in scores.scores.iter().enumerate() {
        let mut rec = vec![i.to_string(), s.to_string(), Label::from_score(s).to_string()];
        if let Some(raw) = &table.raw_labels {
            rec.push(raw[i].clone());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn fdr(a: FdrArgs) -> anyhow::Result<()> {
    let d = load_csv(&a.input, &a.csv.options())?;
    let report = dataset_fdr(&d);
    let mut value = serde_json::to_value(&report)?;
    if let Some(k) = a.top_k {
        value["top_k"] = serde_json::to_value(select_top_k(&report, k)?)?;
    }
    if let Some(names) = d.dim_names() {
        value["dim_names"] = serde_json::to_value(names)?;
    }
    write_text(a.out.as_deref(), &(serde_json::to_string_pretty(&value)? + "\n"))
}

fn inject(a: InjectArgs) -> anyhow::Result<()> {
    let opts = a.csv.options();
    let d = load_csv(&a.input, &opts)?;
    let masked = inject_missing(&d, &MissingSpec::new(a.rate, a.seed)?);
    let mut w = output(a.out.as_deref())?;
    write_csv(&masked, &mut w, opts.label_column, &a.missing_as)?;
    w.flush()?;
    Ok(())
}

fn compare_cmd(a: CompareArgs) -> anyhow::Result<()> {
    let mut loaded = Vec::with_capacity(a.reports.len());
    for arg in &a.reports {
        let (label, path) = match arg.split_once('=') {
            Some((l, p)) => (Some(l.to_string()), p),
            None => (None, arg.as_str()),
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let report = ExperimentReport::from_json(&text).with_context(|| format!("parsing {path}"))?;
        loaded.push((label.unwrap_or_else(|| report.config.label()), report));
    }
    let refs: Vec<(String, &ExperimentReport)> = loaded.iter().map(|(l, r)| (l.clone(), r)).collect();
    let cmp = compare(&refs)?;
    if let Some(p) = a.plot_csv {
        let file = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        cmp.write_plot_csv(BufWriter::new(file))?;
    }
    if let Some(p) = a.json {
        fs::write(&p, serde_json::to_string_pretty(&cmp)? + "\n")
            .with_context(|| format!("writing {}", p.display()))?;
    }
    write_text(a.out.as_deref(), &cmp.to_markdown())
}
