//! Experiments built on top of the bias sweep: per-sample optima, bootstrap
//! calibration, quantile accuracy, and the three-method comparison.

use serde::{Deserialize, Serialize};

use qse_core::seed::open_unit;
use qse_core::{
    bc_entropy, box_stats, default_bandwidth_grid, default_bin_grid, derive_seed, interpolated_quantile, kd_entropy,
    qs_entropy, qs_entropy_bootstrap, rng_from_seed, stream_id, tune_bandwidth, tune_bins_loo, Distribution, Error,
    QsConfig, QuantileCount, Sample, Summary,
};

use crate::config::{ExperimentConfig, Method};
use crate::error::{BenchError, Result};
use crate::sweep::{
    estimate_at, estimator_seed, first_sign_change, per_repetition, sample_seed, tally, Cell, MAX_FAILURE_RATE,
};

const QUANTILE_STREAM: u64 = stream_id("bench/quantile-study");

/// Distribution of per-sample optimal hyperparameters at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimumCell {
    pub n_s: usize,
    pub rep_count: usize,
    /// Samples whose bias curve never changed sign, or failed to evaluate.
    pub fail_count: usize,
    pub stats: Option<Summary>,
    /// Samples whose curve changed sign more than once.
    pub multiple_count: usize,
}

impl OptimumCell {
    pub fn is_valid(&self) -> bool {
        self.stats.is_some() && self.fail_count as f64 <= MAX_FAILURE_RATE * (self.rep_count + self.fail_count) as f64
    }
}

/// Zero-bias hyperparameter of each individual sample, in grid units
/// (`α`, bin fraction, or `K`), summarized per sample size.
pub fn optimal_hyperparameter_study(cfg: &ExperimentConfig) -> Result<Vec<OptimumCell>> {
    cfg.validate()?;
    let truth = cfg.spec.true_entropy()?;
    let mut out = Vec::with_capacity(cfg.sample_sizes.len());
    for &n_s in &cfg.sample_sizes {
        let per_rep = per_repetition(cfg.repetitions, |rep| {
            let seed = sample_seed(cfg.base_seed, n_s, rep);
            let sample = cfg.spec.sample(n_s, seed);
            let errors: Option<Vec<f64>> = cfg
                .grid
                .iter()
                .map(|&g| estimate_at(cfg.method, &sample, g, cfg.n_subsamples, estimator_seed(seed)).ok().map(|h| h - truth))
                .collect();
            errors.and_then(|e| first_sign_change(&cfg.grid, &e))
        });
        let multiple_count = per_rep.iter().flatten().filter(|c| c.multiple).count();
        let (values, fail_count) = tally(per_rep.iter().map(|c| c.map(|c| c.value)));
        out.push(OptimumCell { n_s, rep_count: values.len(), fail_count, stats: box_stats(&values).ok(), multiple_count });
    }
    Ok(out)
}

/// Bootstrap-to-actual IQR ratios at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IqrCell {
    pub n_s: usize,
    /// IQR of the point estimates across parent samples.
    pub actual_iqr: f64,
    pub rep_count: usize,
    pub fail_count: usize,
    pub ratios: Vec<f64>,
    pub stats: Option<Summary>,
}

impl IqrCell {
    pub fn is_valid(&self) -> bool {
        self.stats.is_some() && self.fail_count as f64 <= MAX_FAILURE_RATE * (self.rep_count + self.fail_count) as f64
    }
}

/// For each parent sample, the IQR of its QS bootstrap distribution divided
/// by the IQR of QS point estimates over all parent samples.
pub fn bootstrap_iqr_study(
    spec: &Distribution,
    sample_sizes: &[usize],
    repetitions: usize,
    qs: &QsConfig,
    base_seed: u64,
) -> Result<Vec<IqrCell>> {
    if repetitions < 2 {
        return Err(BenchError::Config("repetitions must be at least 2".into()));
    }
    spec.validate()?;
    let mut out = Vec::with_capacity(sample_sizes.len());
    for &n_s in sample_sizes {
        let per_rep = per_repetition(repetitions, |rep| {
            let seed = sample_seed(base_seed, n_s, rep);
            let sample = spec.sample(n_s, seed);
            let est = qs_entropy_bootstrap(&sample, &qs.with_seed(estimator_seed(seed))).ok()?;
            Some((est.point, est.summary?.iqr))
        });
        let points: Vec<f64> = per_rep.iter().flatten().map(|p| p.0).collect();
        let fail_count = repetitions - points.len();
        let actual_iqr = box_stats(&points).map(|s| s.iqr).unwrap_or(f64::NAN);
        let ratios: Vec<f64> = per_rep.iter().flatten().map(|p| p.1 / actual_iqr).collect();
        let stats = if actual_iqr > 0.0 { box_stats(&ratios).ok() } else { None };
        out.push(IqrCell { n_s, actual_iqr, rep_count: ratios.len(), fail_count, ratios, stats });
    }
    Ok(out)
}

/// Percent error of the estimated `p`-quantile for one `(N_Z, N_K)` setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileCell {
    pub n_quantiles: usize,
    pub n_subsamples: usize,
    pub probability: f64,
    pub true_quantile: f64,
    pub rep_count: usize,
    pub stats: Summary,
}

/// Sorted draws of size `m` from `spec`: sorted uniforms from normalized
/// exponential spacings, pushed through the quantile function.
fn sorted_draws(spec: &Distribution, m: usize, rng: &mut qse_core::StreamRng, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    let mut total = 0.0;
    for _ in 0..m {
        total += -open_unit(rng).ln();
        out.push(total);
    }
    total += -open_unit(rng).ln();
    for v in out.iter_mut() {
        *v = spec.quantile(*v / total)?;
    }
    Ok(())
}

/// Quantile estimation with an effectively infinite sample: each of the
/// `N_K` subsets holds `N_Z − 1` fresh draws from the density, and the
/// averaged order statistics are read at each probability by linear
/// interpolation (rank `1 + p·(N_Z − 2)`).
pub fn quantile_bias_study(
    spec: &Distribution,
    settings: &[(usize, usize)],
    probabilities: &[f64],
    repetitions: usize,
    base_seed: u64,
) -> Result<Vec<QuantileCell>> {
    if repetitions < 2 {
        return Err(BenchError::Config("repetitions must be at least 2".into()));
    }
    let truths: Vec<f64> = probabilities.iter().map(|&p| spec.quantile(p)).collect::<qse_core::Result<_>>()?;
    if let Some(i) = truths.iter().position(|z| *z == 0.0) {
        return Err(Error::Domain(format!("true quantile at p = {} is zero", probabilities[i])).into());
    }
    let mut out = Vec::new();
    for (cell, &(n_z, n_k)) in settings.iter().enumerate() {
        if n_z < 3 || n_k == 0 {
            return Err(BenchError::Config(format!("need N_Z >= 3 and N_K >= 1, got ({n_z}, {n_k})")));
        }
        let m = n_z - 1;
        let per_rep: Vec<Result<Vec<f64>>> = per_repetition(repetitions, |rep| {
            let mut rng = rng_from_seed(derive_seed(derive_seed(base_seed, QUANTILE_STREAM, cell as u64), QUANTILE_STREAM, rep as u64));
            let mut sums = vec![0.0; m];
            let mut draws = Vec::with_capacity(m);
            for _ in 0..n_k {
                sorted_draws(spec, m, &mut rng, &mut draws)?;
                for (s, d) in sums.iter_mut().zip(&draws) {
                    *s += d;
                }
            }
            let z_hat: Vec<f64> = sums.iter().map(|s| s / n_k as f64).collect();
            Ok(probabilities
                .iter()
                .zip(&truths)
                .map(|(&p, &z)| 100.0 * (interpolated_quantile(&z_hat, p) - z) / z)
                .collect())
        });
        let per_rep: Vec<Vec<f64>> = per_rep.into_iter().collect::<Result<_>>()?;
        for (pi, (&p, &z)) in probabilities.iter().zip(&truths).enumerate() {
            let errors: Vec<f64> = per_rep.iter().map(|r| r[pi]).collect();
            out.push(QuantileCell {
                n_quantiles: n_z,
                n_subsamples: n_k,
                probability: p,
                true_quantile: z,
                rep_count: repetitions,
                stats: box_stats(&errors)?,
            });
        }
    }
    Ok(out)
}

/// One method's results at one sample size in a paired comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodCell {
    pub spec: Distribution,
    pub method: Method,
    pub truth: f64,
    /// `grid_value` is the median hyperparameter used: `α`, tuned bin
    /// fraction, or tuned `K`.
    pub cell: Cell,
}

pub const COMPARISON_ALPHA: f64 = 0.25;

fn compare_one(sample: &Sample, seed: u64) -> [Option<(f64, f64)>; 3] {
    let n_s = sample.len();
    let qs = qs_entropy(
        sample,
        &QsConfig { quantiles: QuantileCount::Fraction(COMPARISON_ALPHA), ..QsConfig::default() }.with_seed(estimator_seed(seed)),
    )
    .ok()
    .map(|h| (h, COMPARISON_ALPHA));
    let bc = tune_bins_loo(sample, &default_bin_grid(n_s))
        .and_then(|b| Ok((bc_entropy(sample, b)?, b as f64 / n_s as f64)))
        .ok();
    let kd = tune_bandwidth(sample, &default_bandwidth_grid(sample))
        .and_then(|s| Ok((kd_entropy(sample, s)?, s * (n_s as f64).sqrt())))
        .ok();
    [qs, bc, kd]
}

/// QS at `α = 0.25` against BC and KD tuned per sample by leave-one-out
/// likelihood, all three applied to the same sample sets.
pub fn compare_methods(
    specs: &[Distribution],
    sample_sizes: &[usize],
    repetitions: usize,
    base_seed: u64,
) -> Result<Vec<MethodCell>> {
    if repetitions < 2 {
        return Err(BenchError::Config("repetitions must be at least 2".into()));
    }
    let mut out = Vec::new();
    for spec in specs {
        let truth = spec.true_entropy()?;
        for &n_s in sample_sizes {
            let per_rep = per_repetition(repetitions, |rep| {
                let seed = sample_seed(base_seed, n_s, rep);
                compare_one(&spec.sample(n_s, seed), seed)
            });
            for (mi, method) in [Method::Qs, Method::Bc, Method::Kd].into_iter().enumerate() {
                let (values, fail_count) = tally(per_rep.iter().map(|r| r[mi].map(|v| v.0)));
                let params: Vec<f64> = per_rep.iter().filter_map(|r| r[mi].map(|v| v.1)).collect();
                let median = box_stats(&params).map(|s| s.median).unwrap_or(f64::NAN);
                out.push(MethodCell {
                    spec: spec.clone(),
                    method,
                    truth,
                    cell: Cell::from_values(n_s, median, &values, fail_count, truth),
                });
            }
        }
    }
    Ok(out)
}
