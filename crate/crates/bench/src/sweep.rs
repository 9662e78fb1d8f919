//! Bias sweeps over a hyperparameter grid and zero-crossing location.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qse_core::{
    bc_entropy, box_stats, derive_seed, kd_entropy, qs_entropy, stream_id, Distribution, QsConfig, QuantileCount,
    Sample, Summary,
};

use crate::config::{ExperimentConfig, Method};
use crate::error::Result;

const SAMPLE_STREAM: u64 = stream_id("bench/sample");
const ESTIMATOR_STREAM: u64 = stream_id("bench/estimator");

/// Cells with a larger share of failed replicates are invalid.
pub const MAX_FAILURE_RATE: f64 = 0.05;
/// Smallest `|H|` for which a percent bias is reported.
pub const MIN_RELATIVE_TRUTH: f64 = 0.1;

/// Seed of the sample drawn for repetition `rep` at size `n_s`.
///
/// Depends only on the base seed, so every experiment sharing a base seed
/// sees the same sample sets.
pub fn sample_seed(base_seed: u64, n_s: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(base_seed, SAMPLE_STREAM, n_s as u64), SAMPLE_STREAM, rep as u64)
}

pub fn draw_sample(spec: &Distribution, base_seed: u64, n_s: usize, rep: usize) -> Sample {
    spec.sample(n_s, sample_seed(base_seed, n_s, rep))
}

/// Seed for any randomness inside an estimator applied to a given sample.
pub fn estimator_seed(sample_seed: u64) -> u64 {
    derive_seed(sample_seed, ESTIMATOR_STREAM, 0)
}

/// Applies `method` at one grid value: `α` for QS, bin fraction for BC,
/// `K` for KD.
pub fn estimate_at(method: Method, sample: &Sample, grid_value: f64, n_subsamples: usize, seed: u64) -> qse_core::Result<f64> {
    let n_s = sample.len();
    match method {
        Method::Qs => {
            let cfg = QsConfig { quantiles: QuantileCount::Fraction(grid_value), n_subsamples, n_bootstrap: 1, seed };
            qs_entropy(sample, &cfg)
        }
        Method::Bc => bc_entropy(sample, bins_for_fraction(grid_value, n_s)),
        Method::Kd => kd_entropy(sample, sigma_for_k(grid_value, n_s)),
    }
}

pub fn bins_for_fraction(fraction: f64, n_s: usize) -> usize {
    ((fraction * n_s as f64).round() as usize).max(1)
}

pub fn sigma_for_k(k: f64, n_s: usize) -> f64 {
    k / (n_s as f64).sqrt()
}

/// Summary of the replicate estimates at one `(N_S, grid value)` point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n_s: usize,
    pub grid_value: f64,
    pub rep_count: usize,
    pub fail_count: usize,
    pub stats: Option<Summary>,
    /// `100 · (mean − H) / H`; absent when `|H| < MIN_RELATIVE_TRUTH`.
    pub percent_bias: Option<f64>,
    /// `mean − H` in nats.
    pub abs_error: Option<f64>,
}

impl Cell {
    pub fn from_values(n_s: usize, grid_value: f64, values: &[f64], fail_count: usize, truth: f64) -> Self {
        let stats = box_stats(values).ok();
        let abs_error = stats.map(|s| s.mean - truth);
        let percent_bias = match abs_error {
            Some(e) if truth.abs() >= MIN_RELATIVE_TRUTH => Some(100.0 * e / truth),
            _ => None,
        };
        Self { n_s, grid_value, rep_count: values.len(), fail_count, stats, percent_bias, abs_error }
    }

    pub fn failure_rate(&self) -> f64 {
        self.fail_count as f64 / (self.rep_count + self.fail_count).max(1) as f64
    }

    pub fn is_valid(&self) -> bool {
        self.stats.is_some() && self.failure_rate() <= MAX_FAILURE_RATE
    }

    /// Signed bias in the cell's reporting unit: percent when available,
    /// nats otherwise.
    pub fn bias(&self) -> Option<f64> {
        self.percent_bias.or(self.abs_error)
    }

    /// Monte-Carlo standard error of [`Cell::bias`].
    pub fn bias_std_error(&self, truth: f64) -> Option<f64> {
        let se = self.stats?.std / (self.rep_count as f64).sqrt();
        Some(if self.percent_bias.is_some() { 100.0 * se / truth.abs() } else { se })
    }
}

/// Expected bias for every `(N_S, grid value)` of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasCurve {
    pub spec: Distribution,
    pub method: Method,
    pub truth: f64,
    pub grid: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    /// Row-major: all grid points of the first sample size, then the next.
    pub cells: Vec<Cell>,
}

impl BiasCurve {
    pub fn row(&self, n_s: usize) -> Option<&[Cell]> {
        let i = self.sample_sizes.iter().position(|&n| n == n_s)?;
        let g = self.grid.len();
        Some(&self.cells[i * g..(i + 1) * g])
    }

    pub fn cell(&self, n_s: usize, grid_value: f64) -> Option<&Cell> {
        self.row(n_s)?.iter().find(|c| c.grid_value == grid_value)
    }

    pub fn invalid_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.is_valid())
    }
}

/// Runs `f` on every repetition in parallel and returns the results in
/// repetition order.
pub(crate) fn per_repetition<R: Send, F: Fn(usize) -> R + Sync + Send>(repetitions: usize, f: F) -> Vec<R> {
    (0..repetitions).into_par_iter().map(f).collect()
}

/// Splits per-grid outcomes into successes and a failure count.
pub(crate) fn tally(outcomes: impl Iterator<Item = Option<f64>>) -> (Vec<f64>, usize) {
    let mut ok = Vec::new();
    let mut failed = 0;
    for o in outcomes {
        match o {
            Some(v) => ok.push(v),
            None => failed += 1,
        }
    }
    (ok, failed)
}

/// Draws `repetitions` samples per size, applies the estimator at every grid
/// value, and summarizes against the true entropy.
///
/// All grid values at a given `(N_S, repetition)` share one sample.
pub fn run_bias_sweep(cfg: &ExperimentConfig) -> Result<BiasCurve> {
    cfg.validate()?;
    let truth = cfg.spec.true_entropy()?;
    let mut cells = Vec::with_capacity(cfg.sample_sizes.len() * cfg.grid.len());
    for &n_s in &cfg.sample_sizes {
        let per_rep: Vec<Vec<Option<f64>>> = per_repetition(cfg.repetitions, |rep| {
            let seed = sample_seed(cfg.base_seed, n_s, rep);
            let sample = cfg.spec.sample(n_s, seed);
            cfg.grid
                .iter()
                .map(|&g| estimate_at(cfg.method, &sample, g, cfg.n_subsamples, estimator_seed(seed)).ok())
                .collect()
        });
        for (gi, &g) in cfg.grid.iter().enumerate() {
            let (values, failed) = tally(per_rep.iter().map(|r| r[gi]));
            cells.push(Cell::from_values(n_s, g, &values, failed, truth));
        }
    }
    Ok(BiasCurve {
        spec: cfg.spec.clone(),
        method: cfg.method,
        truth,
        grid: cfg.grid.clone(),
        sample_sizes: cfg.sample_sizes.clone(),
        cells,
    })
}

/// Where a bias curve first changes sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub value: f64,
    /// Grid index at or just before the crossing.
    pub index: usize,
    /// Whether the curve changes sign again further along the grid.
    pub multiple: bool,
    /// Delta-method standard error of `value`, when the inputs allow one.
    pub std_error: Option<f64>,
}

/// First sign change of `values` along `grid`, by linear interpolation.
///
/// A value of exactly zero counts as a crossing at that grid point.
pub fn first_sign_change(grid: &[f64], values: &[f64]) -> Option<Crossing> {
    assert_eq!(grid.len(), values.len(), "grid and values differ in length");
    let mut found: Option<Crossing> = None;
    let mut changes = 0;
    for i in 0..values.len() {
        let here = values[i];
        let crossing = if here == 0.0 {
            Some((grid[i], i))
        } else if i + 1 < values.len() && here * values[i + 1] < 0.0 {
            let next = values[i + 1];
            let t = here / (here - next);
            Some((grid[i] + t * (grid[i + 1] - grid[i]), i))
        } else {
            None
        };
        if let Some((value, index)) = crossing {
            changes += 1;
            if found.is_none() {
                found = Some(Crossing { value, index, multiple: false, std_error: None });
            }
        }
    }
    found.map(|c| Crossing { multiple: changes > 1, ..c })
}

/// First zero crossing of the expected bias at sample size `n_s`, skipping
/// invalid cells.
pub fn zero_crossing(curve: &BiasCurve, n_s: usize) -> Option<Crossing> {
    let row: Vec<&Cell> = curve.row(n_s)?.iter().filter(|c| c.is_valid()).collect();
    let grid: Vec<f64> = row.iter().map(|c| c.grid_value).collect();
    let bias: Vec<f64> = row.iter().map(|c| c.bias().expect("valid cell")).collect();
    let mut crossing = first_sign_change(&grid, &bias)?;
    let i = crossing.index;
    crossing.std_error = if bias[i] == 0.0 || i + 1 >= row.len() {
        None
    } else {
        // Interpolate the bias standard error to the crossing, then map it
        // through the local slope.
        let t = (crossing.value - grid[i]) / (grid[i + 1] - grid[i]);
        let se_left = row[i].bias_std_error(curve.truth)?;
        let se_right = row[i + 1].bias_std_error(curve.truth)?;
        let slope = (bias[i + 1] - bias[i]) / (grid[i + 1] - grid[i]);
        Some(((1.0 - t) * se_left + t * se_right) / slope.abs())
    };
    Some(crossing)
}
