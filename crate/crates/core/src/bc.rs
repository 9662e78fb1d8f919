//! Equal-width bin-counting entropy estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::SampleSet;
use crate::scalar::Real;

/// Bin resolution: a count, or a target width converted to the nearest
/// count over the sample range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinSpec {
    Count(usize),
    Width(f64),
}

impl BinSpec {
    pub fn resolve(&self, range: f64) -> Result<usize> {
        match *self {
            BinSpec::Count(n) if n >= 1 => Ok(n),
            BinSpec::Count(_) => Err(Error::Domain("number of bins must be at least 1".into())),
            BinSpec::Width(w) if w > 0.0 && w.is_finite() => Ok(((range / w).round() as usize).max(1)),
            BinSpec::Width(w) => Err(Error::Domain(format!("bin width must be positive, got {w}"))),
        }
    }
}

/// Bin fractions of `N_S` making up the default tuning grid.
pub const DEFAULT_BIN_FRACTIONS: [f64; 11] = [0.005, 0.01, 0.02, 0.03, 0.05, 0.075, 0.10, 0.15, 0.20, 0.30, 0.50];

/// `round(N_S · f)` for each default fraction, clipped to `[1, N_S]`, deduplicated.
pub fn default_bin_grid(n_samples: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = DEFAULT_BIN_FRACTIONS
        .iter()
        .map(|f| ((f * n_samples as f64).round() as usize).clamp(1, n_samples.max(1)))
        .collect();
    grid.dedup();
    grid
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram<T> {
    /// `N_Bin + 1` strictly increasing edges from `x_min` to `x_max`.
    pub edges: Vec<T>,
    pub counts: Vec<usize>,
    pub width: T,
}

impl<T: Real> Histogram<T> {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Fraction of the sample in each bin.
    pub fn masses(&self) -> Vec<T> {
        let n = T::from_count(self.total());
        self.counts.iter().map(|&c| T::from_count(c) / n).collect()
    }
}

#[inline]
fn bin_index<T: Real>(x: T, lo: T, hi: T, n_bins: usize) -> usize {
    let t = (x - lo) / (hi - lo) * T::from_count(n_bins);
    t.floor().to_usize().unwrap_or(0).min(n_bins - 1)
}

/// Equal-width histogram over `[min, max]`; bins are `[X_{j−1}, X_j)` with
/// the last bin closed so the maximum is counted.
pub fn build_histogram<T: Real>(sample: &SampleSet<T>, n_bins: usize) -> Result<Histogram<T>> {
    if n_bins < 1 {
        return Err(Error::Domain("number of bins must be at least 1".into()));
    }
    let (lo, hi) = sample.support()?;
    let width = (hi - lo) / T::from_count(n_bins);
    let mut edges: Vec<T> = (0..n_bins).map(|j| lo + T::from_count(j) * width).collect();
    edges.push(hi);
    let mut counts = vec![0usize; n_bins];
    for &x in sample.values() {
        counts[bin_index(x, lo, hi, n_bins)] += 1;
    }
    Ok(Histogram { edges, counts, width })
}

/// Discrete entropy of the bin masses plus `ln Δ`; empty bins contribute 0.
pub fn bc_entropy<T: Real>(sample: &SampleSet<T>, n_bins: usize) -> Result<T> {
    let hist = build_histogram(sample, n_bins)?;
    Ok(histogram_entropy(&hist))
}

pub fn histogram_entropy<T: Real>(hist: &Histogram<T>) -> T {
    let discrete: T = hist
        .masses()
        .into_iter()
        .filter(|&m| m > T::zero())
        .map(|m| -m * m.ln())
        .sum();
    discrete + hist.width.ln()
}

/// Leave-one-out log-likelihood of the histogram density.
///
/// A point alone in its bin would score zero density once removed; it is
/// instead credited one phantom count spread over the whole range,
/// `1 / ((N_S − 1) · (x_max − x_min))`.
pub fn loo_log_likelihood_bins<T: Real>(sample: &SampleSet<T>, n_bins: usize) -> Result<T> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientSample("leave-one-out likelihood needs at least 2 values".into()));
    }
    let hist = build_histogram(sample, n_bins)?;
    let (lo, hi) = sample.support()?;
    let others = T::from_count(n - 1);
    let floor = -(others * (hi - lo)).ln();
    let per_count = -(others * hist.width).ln();
    Ok(hist
        .counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let score = if c > 1 { T::from_count(c - 1).ln() + per_count } else { floor };
            T::from_count(c) * score
        })
        .sum())
}

/// Grid candidate maximizing the leave-one-out likelihood; ties go to
/// fewer bins.
pub fn tune_bins_loo<T: Real>(sample: &SampleSet<T>, grid: &[usize]) -> Result<usize> {
    if grid.is_empty() {
        return Err(Error::Domain("bin tuning grid is empty".into()));
    }
    let mut best: Option<(usize, T)> = None;
    for &n_bins in grid {
        let ll = loo_log_likelihood_bins(sample, n_bins)?;
        best = match best {
            Some((b, v)) if v > ll || (v == ll && b <= n_bins) => Some((b, v)),
            _ => Some((n_bins, ll)),
        };
    }
    Ok(best.expect("non-empty grid").0)
}
