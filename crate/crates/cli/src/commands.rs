//! Subcommand bodies. Each returns the bytes to emit so the caller decides
//! where they go.

use std::f64::consts::LN_2;
use std::io::Write;

use serde::Serialize;

use qse_bench::{run_figure, write_csv, write_json, FigureOptions};
use qse_core::{
    bc_entropy, default_bandwidth_grid, default_bin_grid, kd_entropy, qs_entropy_bootstrap, tune_bandwidth,
    tune_bins_loo, Bandwidth, BinSpec, Distribution, QsConfig, QuantileCount, Sample, Summary,
};

use crate::args::{BcArgs, EstimateArgs, FigureArgs, Format, KdArgs, MethodArg, QsArgs, SampleArgs, TuneArgs};
use crate::error::CliError;
use crate::input::read_sample;

/// Fewest values accepted by the quantile-spacing path.
pub const MIN_QS_VALUES: usize = 10;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Hyperparameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_quantiles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_subsamples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bootstrap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capital_k: Option<f64>,
    /// Whether the value was chosen by leave-one-out likelihood.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuned: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BootstrapReport {
    #[serde(flatten)]
    pub summary: Summary,
    pub failed_replicates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub method: &'static str,
    pub n_s: usize,
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
    pub unit: &'static str,
    pub entropy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapReport>,
}

impl EstimateReport {
    fn in_bits(mut self) -> Self {
        let s = 1.0 / LN_2;
        self.unit = "bits";
        self.entropy *= s;
        if let Some(b) = self.bootstrap.as_mut() {
            let m = &mut b.summary;
            for v in [&mut m.mean, &mut m.median, &mut m.q25, &mut m.q75, &mut m.iqr, &mut m.p2_5, &mut m.p97_5, &mut m.std] {
                *v *= s;
            }
        }
        self
    }
}

/// Flat single-row form of a report for CSV output.
#[derive(Serialize)]
struct ReportRow<'a> {
    method: &'a str,
    n_s: usize,
    alpha: Option<f64>,
    n_quantiles: Option<usize>,
    n_subsamples: Option<usize>,
    n_bootstrap: Option<usize>,
    n_bins: Option<usize>,
    bin_width: Option<f64>,
    sigma_k: Option<f64>,
    capital_k: Option<f64>,
    tuned: Option<bool>,
    seed: Option<u64>,
    unit: Option<&'a str>,
    entropy: Option<f64>,
    mean: Option<f64>,
    median: Option<f64>,
    q25: Option<f64>,
    q75: Option<f64>,
    iqr: Option<f64>,
    p2_5: Option<f64>,
    p97_5: Option<f64>,
    std: Option<f64>,
    failed_replicates: Option<usize>,
}

impl<'a> ReportRow<'a> {
    fn new(method: &'a str, n_s: usize, h: &Hyperparameters) -> Self {
        Self {
            method,
            n_s,
            alpha: h.alpha,
            n_quantiles: h.n_quantiles,
            n_subsamples: h.n_subsamples,
            n_bootstrap: h.n_bootstrap,
            n_bins: h.n_bins,
            bin_width: h.bin_width,
            sigma_k: h.sigma_k,
            capital_k: h.capital_k,
            tuned: h.tuned,
            seed: None,
            unit: None,
            entropy: None,
            mean: None,
            median: None,
            q25: None,
            q75: None,
            iqr: None,
            p2_5: None,
            p97_5: None,
            std: None,
            failed_replicates: None,
        }
    }
}

fn render<T: Serialize>(value: &T, row: ReportRow<'_>, format: Format) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, value)?;
            out.push(b'\n');
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
            w.serialize(row)?;
            w.flush()?;
        }
    }
    Ok(out)
}

fn load(path: &std::path::Path, csv_column: Option<&str>) -> Result<Sample, CliError> {
    Ok(Sample::new(read_sample(path, csv_column)?)?)
}

fn qs_report(sample: &Sample, args: &QsArgs, seed: u64) -> Result<EstimateReport, CliError> {
    if sample.len() < MIN_QS_VALUES {
        return Err(qse_core::Error::InsufficientSample(format!(
            "quantile spacing needs at least {MIN_QS_VALUES} values, got {}",
            sample.len()
        ))
        .into());
    }
    let quantiles = match args.n_quantiles {
        Some(n) => QuantileCount::Count(n),
        None => QuantileCount::Fraction(args.alpha),
    };
    let cfg = QsConfig { quantiles, n_subsamples: args.n_subsamples, n_bootstrap: args.n_bootstrap, seed };
    let n_z = quantiles.resolve(sample.len())?;
    let est = qs_entropy_bootstrap(sample, &cfg)?;
    let hyper = Hyperparameters {
        alpha: args.n_quantiles.is_none().then_some(args.alpha),
        n_quantiles: Some(n_z),
        n_subsamples: Some(args.n_subsamples),
        n_bootstrap: Some(args.n_bootstrap),
        ..Default::default()
    };
    let bootstrap = est.summary.map(|summary| BootstrapReport { summary, failed_replicates: est.failed_replicates });
    Ok(EstimateReport { method: "qs", n_s: sample.len(), hyperparameters: hyper, seed, unit: "nats", entropy: est.point, bootstrap })
}

fn bc_bins(sample: &Sample, args: &BcArgs) -> Result<(usize, bool), CliError> {
    let (lo, hi) = sample.support()?;
    match (args.bins, args.bin_width) {
        (Some(n), _) => Ok((BinSpec::Count(n).resolve(hi - lo)?, false)),
        (None, Some(w)) => Ok((BinSpec::Width(w).resolve(hi - lo)?, false)),
        (None, None) => Ok((tune_bins_loo(sample, &default_bin_grid(sample.len()))?, true)),
    }
}

fn bc_hyper(sample: &Sample, n_bins: usize, tuned: bool) -> Result<Hyperparameters, CliError> {
    let (lo, hi) = sample.support()?;
    Ok(Hyperparameters { n_bins: Some(n_bins), bin_width: Some((hi - lo) / n_bins as f64), tuned: Some(tuned), ..Default::default() })
}

fn kd_sigma(sample: &Sample, args: &KdArgs) -> Result<(f64, bool), CliError> {
    match (args.sigma, args.capital_k) {
        (Some(s), _) => Ok((Bandwidth::Sigma(s).resolve(sample.len())?, false)),
        (None, Some(k)) => Ok((Bandwidth::CapitalK(k).resolve(sample.len())?, false)),
        (None, None) => Ok((tune_bandwidth(sample, &default_bandwidth_grid(sample))?, true)),
    }
}

fn kd_hyper(sample: &Sample, sigma: f64, tuned: bool) -> Hyperparameters {
    let k = sigma * (sample.len() as f64).sqrt();
    Hyperparameters { sigma_k: Some(sigma), capital_k: Some(k), tuned: Some(tuned), ..Default::default() }
}

pub fn estimate(args: &EstimateArgs) -> Result<Vec<u8>, CliError> {
    let sample = load(&args.input, args.csv_column.as_deref())?;
    let mut report = match args.method {
        MethodArg::Qs => qs_report(&sample, &args.qs, args.seed)?,
        MethodArg::Bc => {
            let (n_bins, tuned) = bc_bins(&sample, &args.bc)?;
            let entropy = bc_entropy(&sample, n_bins)?;
            let hyper = bc_hyper(&sample, n_bins, tuned)?;
            EstimateReport { method: "bc", n_s: sample.len(), hyperparameters: hyper, seed: args.seed, unit: "nats", entropy, bootstrap: None }
        }
        MethodArg::Kd => {
            let (sigma, tuned) = kd_sigma(&sample, &args.kd)?;
            let entropy = kd_entropy(&sample, sigma)?;
            let hyper = kd_hyper(&sample, sigma, tuned);
            EstimateReport { method: "kd", n_s: sample.len(), hyperparameters: hyper, seed: args.seed, unit: "nats", entropy, bootstrap: None }
        }
    };
    if args.bits {
        report = report.in_bits();
    }
    let mut row = ReportRow::new(report.method, report.n_s, &report.hyperparameters);
    row.seed = Some(report.seed);
    row.unit = Some(report.unit);
    row.entropy = Some(report.entropy);
    if let Some(b) = &report.bootstrap {
        let s = &b.summary;
        row.mean = Some(s.mean);
        row.median = Some(s.median);
        row.q25 = Some(s.q25);
        row.q75 = Some(s.q75);
        row.iqr = Some(s.iqr);
        row.p2_5 = Some(s.p2_5);
        row.p97_5 = Some(s.p97_5);
        row.std = Some(s.std);
        row.failed_replicates = Some(b.failed_replicates);
    }
    render(&report, row, args.format)
}

#[derive(Serialize)]
struct TuneReport {
    method: &'static str,
    n_s: usize,
    hyperparameters: Hyperparameters,
}

pub fn tune(args: &TuneArgs) -> Result<Vec<u8>, CliError> {
    let sample = load(&args.input, args.csv_column.as_deref())?;
    let (method, hyper) = match args.method {
        MethodArg::Bc => {
            let n_bins = tune_bins_loo(&sample, &default_bin_grid(sample.len()))?;
            ("bc", bc_hyper(&sample, n_bins, true)?)
        }
        MethodArg::Kd => {
            let sigma = tune_bandwidth(&sample, &default_bandwidth_grid(&sample))?;
            ("kd", kd_hyper(&sample, sigma, true))
        }
        MethodArg::Qs => return Err(CliError::Usage("the quantile-spacing estimator has no tuned hyperparameter".into())),
    };
    let report = TuneReport { method, n_s: sample.len(), hyperparameters: hyper };
    let row = ReportRow::new(method, sample.len(), &report.hyperparameters);
    render(&report, row, args.format)
}

pub fn sample(args: &SampleArgs) -> Result<Vec<u8>, CliError> {
    let spec: Distribution = serde_json::from_str(&args.dist)
        .map_err(|e| CliError::Usage(format!("invalid distribution JSON: {e}")))?;
    let spec = spec.validated().map_err(|e| CliError::Usage(format!("{}: {e}", e.name())))?;
    let mut out = Vec::new();
    for v in spec.sample(args.n, args.seed).values() {
        writeln!(out, "{v}")?;
    }
    Ok(out)
}

/// Runs a figure and returns its table; invalid cells are reported after
/// the table is produced so partial results are never lost.
pub fn figure(args: &FigureArgs) -> Result<(Vec<u8>, Vec<String>), CliError> {
    let mut opts = FigureOptions { repetitions: args.reps, base_seed: args.seed, ..FigureOptions::default() };
    if let Some(sizes) = &args.sizes {
        opts.sample_sizes = sizes.clone();
    }
    let fig = run_figure(args.id, &opts)?;
    let mut out = Vec::new();
    match args.format {
        Format::Csv => write_csv(&fig.records, &mut out)?,
        Format::Json => write_json(&fig.records, &mut out)?,
    }
    Ok((out, fig.invalid))
}
