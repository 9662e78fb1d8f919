//! Quantile-spacing entropy estimator.
//!
//! The density is approximated as piecewise constant between `N_Z + 1`
//! equal-probability quantiles, so each interval carries mass `1 / N_Z` and
//! the entropy reduces to the mean log of the scaled spacings:
//!
//! ```text
//! H = (1 / N_Z) · Σ_j ln(N_Z · Δ_j)
//! ```
//!
//! Interior quantiles are estimated by averaging order statistics over
//! `N_K` random subsets of size `N_Z − 1` drawn without replacement; the end
//! points are the sample minimum and maximum.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::SampleSet;
use crate::scalar::Real;
use crate::seed::{derive_seed, rng_from_seed, stream_id, DEFAULT_SEED};
use crate::stats::{box_stats, BoxStats};

const SUBSET_STREAM: u64 = stream_id("qs/subsets");
const BOOTSTRAP_STREAM: u64 = stream_id("qs/bootstrap");
const RETRY_STREAM: u64 = stream_id("qs/bootstrap-retry");

/// Retries granted to a bootstrap replicate that hits a zero spacing.
pub const BOOTSTRAP_RETRIES: u64 = 3;
/// Largest tolerated fraction of failed bootstrap replicates.
pub const BOOTSTRAP_MAX_FAILURE_RATE: f64 = 0.01;

/// How many quantile intervals to use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileCount {
    /// Fixed `N_Z`.
    Count(usize),
    /// `N_Z = max(2, round(α · N_S))`.
    Fraction(f64),
}

impl QuantileCount {
    pub fn resolve(&self, n_samples: usize) -> Result<usize> {
        match *self {
            QuantileCount::Count(n) if n >= 2 => Ok(n),
            QuantileCount::Count(n) => Err(Error::Domain(format!("N_Z must be at least 2, got {n}"))),
            QuantileCount::Fraction(alpha) if alpha > 0.0 && alpha <= 1.0 => {
                Ok(((alpha * n_samples as f64).round() as usize).max(2))
            }
            QuantileCount::Fraction(alpha) => Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsConfig {
    pub quantiles: QuantileCount,
    /// `N_K`: subsets averaged per quantile.
    pub n_subsamples: usize,
    /// `N_B`: bootstrap replicates.
    pub n_bootstrap: usize,
    pub seed: u64,
}

impl Default for QsConfig {
    fn default() -> Self {
        Self { quantiles: QuantileCount::Fraction(0.25), n_subsamples: 500, n_bootstrap: 500, seed: DEFAULT_SEED }
    }
}

impl QsConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { quantiles: QuantileCount::Fraction(alpha), ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_subsamples(mut self, n_subsamples: usize) -> Self {
        self.n_subsamples = n_subsamples;
        self
    }

    pub fn with_bootstrap(mut self, n_bootstrap: usize) -> Self {
        self.n_bootstrap = n_bootstrap;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n_subsamples == 0 {
            return Err(Error::Domain("N_K must be at least 1".into()));
        }
        if self.n_bootstrap == 0 {
            return Err(Error::Domain("N_B must be at least 1".into()));
        }
        Ok(())
    }
}

/// Estimated quantile vector `{x_min, ẑ_1, …, ẑ_{N_Z−1}, x_max}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QuantileEstimate<T> {
    z_hat: Vec<T>,
}

impl<T: Real> QuantileEstimate<T> {
    /// Wraps a non-decreasing vector of at least two finite points.
    pub fn from_points(z_hat: Vec<T>) -> Result<Self> {
        if z_hat.len() < 2 {
            return Err(Error::Domain("a quantile vector needs at least two points".into()));
        }
        if let Some(i) = z_hat.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        if z_hat.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("quantile vector must be non-decreasing".into()));
        }
        Ok(Self { z_hat })
    }

    pub fn points(&self) -> &[T] {
        &self.z_hat
    }

    /// `N_Z`, the number of intervals.
    pub fn n_intervals(&self) -> usize {
        self.z_hat.len() - 1
    }

    pub fn spacings(&self) -> impl Iterator<Item = T> + '_ {
        self.z_hat.windows(2).map(|w| w[1] - w[0])
    }

    /// Interior estimates `ẑ_1 … ẑ_{N_Z−1}`.
    pub fn interior(&self) -> &[T] {
        &self.z_hat[1..self.z_hat.len() - 1]
    }
}

/// Point estimate plus the optional bootstrap distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EntropyEstimate<T> {
    pub point: T,
    pub bootstrap_values: Option<Vec<T>>,
    pub summary: Option<BoxStats<T>>,
    /// Replicates that still failed after retries (at most 1% of `N_B`).
    pub failed_replicates: usize,
}

/// Reusable scratch space for drawing sorted index subsets.
struct SubsetDrawer {
    bits: Vec<u64>,
    population: usize,
}

impl SubsetDrawer {
    fn new(population: usize) -> Self {
        Self { bits: vec![0; population.div_ceil(64)], population }
    }

    #[inline]
    fn test_and_set(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let was = self.bits[w] & b != 0;
        self.bits[w] |= b;
        was
    }

    /// Marks a uniformly random `k`-subset of `0..population` (Floyd's algorithm).
    fn mark<R: RngCore + ?Sized>(&mut self, k: usize, rng: &mut R) {
        let n = self.population;
        for j in (n - k)..n {
            let t = rng.random_range(0..=j);
            if self.test_and_set(t) {
                self.test_and_set(j);
            }
        }
    }

    /// Draws `m` distinct indices and visits them in ascending order as
    /// `(rank, index)`.
    fn for_each_sorted<R: RngCore + ?Sized, F: FnMut(usize, usize)>(&mut self, m: usize, rng: &mut R, mut visit: F) {
        let n = self.population;
        // Marking the complement is cheaper when m is a majority.
        let complement = 2 * m > n;
        self.mark(if complement { n - m } else { m }, rng);
        let mut rank = 0;
        for (w, word) in self.bits.iter_mut().enumerate() {
            let mut bits = if complement { !*word } else { *word };
            if complement && w == n / 64 {
                bits &= (1u64 << (n % 64)).wrapping_sub(1);
            }
            *word = 0;
            while bits != 0 {
                let i = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                visit(rank, i);
                rank += 1;
            }
        }
        debug_assert_eq!(rank, m);
    }
}

fn check_shape(n_samples: usize, n_quantiles: usize, n_subsamples: usize) -> Result<()> {
    if n_quantiles < 2 {
        return Err(Error::Domain(format!("N_Z must be at least 2, got {n_quantiles}")));
    }
    if n_subsamples == 0 {
        return Err(Error::Domain("N_K must be at least 1".into()));
    }
    if n_quantiles - 1 > n_samples {
        return Err(Error::InsufficientSample(format!(
            "N_Z - 1 = {} exceeds sample size {n_samples}",
            n_quantiles - 1
        )));
    }
    Ok(())
}

/// Quantile estimation on data already sorted ascending.
fn quantiles_from_sorted<T: Real, R: RngCore + ?Sized>(
    sorted: &[T],
    n_quantiles: usize,
    n_subsamples: usize,
    rng: &mut R,
) -> Result<QuantileEstimate<T>> {
    check_shape(sorted.len(), n_quantiles, n_subsamples)?;
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if !(lo < hi) {
        return Err(Error::DegenerateSample);
    }
    let m = n_quantiles - 1;
    let mut sums = vec![T::zero(); m];
    let mut drawer = SubsetDrawer::new(sorted.len());
    for _ in 0..n_subsamples {
        // Indices into sorted data visited in ascending order are the
        // subset's order statistics.
        drawer.for_each_sorted(m, rng, |rank, i| sums[rank] = sums[rank] + sorted[i]);
    }
    let nk = T::from_count(n_subsamples);
    let mut z_hat = Vec::with_capacity(n_quantiles + 1);
    z_hat.push(lo);
    // Rounding in the mean must not push an estimate outside [min, max].
    z_hat.extend(sums.into_iter().map(|s| (s / nk).max(lo).min(hi)));
    z_hat.push(hi);
    Ok(QuantileEstimate { z_hat })
}

/// Estimates the `N_Z + 1` quantile positions of `sample`.
///
/// Each of the `n_subsamples` subsets is an independent draw of `N_Z − 1`
/// distinct sample indices; duplicate values at distinct indices are allowed.
pub fn estimate_quantiles<T: Real, R: RngCore + ?Sized>(
    sample: &SampleSet<T>,
    n_quantiles: usize,
    n_subsamples: usize,
    rng: &mut R,
) -> Result<QuantileEstimate<T>> {
    check_shape(sample.len(), n_quantiles, n_subsamples)?;
    sample.support()?;
    quantiles_from_sorted(&sample.sorted(), n_quantiles, n_subsamples, rng)
}

/// Piecewise-constant entropy `(1/N_Z) Σ ln(N_Z · Δ_j)` of a quantile vector.
pub fn entropy_from_quantiles<T: Real>(q: &QuantileEstimate<T>) -> Result<T> {
    let n = T::from_count(q.n_intervals());
    let mut total = T::zero();
    for (index, d) in q.spacings().enumerate() {
        if !(d > T::zero()) {
            return Err(Error::ZeroSpacing { index: index + 1 });
        }
        total = total + (n * d).ln();
    }
    Ok(total / n)
}

fn qs_sorted<T: Real>(sorted: &[T], cfg: &QsConfig) -> Result<T> {
    let n_quantiles = cfg.quantiles.resolve(sorted.len())?;
    let mut rng = rng_from_seed(derive_seed(cfg.seed, SUBSET_STREAM, 0));
    let q = quantiles_from_sorted(sorted, n_quantiles, cfg.n_subsamples, &mut rng)?;
    entropy_from_quantiles(&q)
}

/// Quantile-spacing entropy estimate in nats.
pub fn qs_entropy<T: Real>(sample: &SampleSet<T>, cfg: &QsConfig) -> Result<T> {
    cfg.check()?;
    let n_quantiles = cfg.quantiles.resolve(sample.len())?;
    check_shape(sample.len(), n_quantiles, cfg.n_subsamples)?;
    sample.support()?;
    qs_sorted(&sample.sorted(), cfg)
}

fn bootstrap_replicate<T: Real>(values: &[T], cfg: &QsConfig, replicate: u64) -> Option<T> {
    let first = derive_seed(cfg.seed, BOOTSTRAP_STREAM, replicate);
    let mut resampled = vec![T::zero(); values.len()];
    for attempt in 0..=BOOTSTRAP_RETRIES {
        let seed = if attempt == 0 { first } else { derive_seed(first, RETRY_STREAM, attempt) };
        let mut rng = rng_from_seed(seed);
        for slot in resampled.iter_mut() {
            *slot = values[rng.random_range(0..values.len())];
        }
        resampled.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let replicate_cfg = QsConfig { seed, ..*cfg };
        match qs_sorted(&resampled, &replicate_cfg) {
            Ok(h) => return Some(h),
            Err(Error::ZeroSpacing { .. } | Error::DegenerateSample) => continue,
            Err(e) => unreachable!("bootstrap replicate shares the parent's validated shape: {e}"),
        }
    }
    None
}

/// Point estimate plus `N_B` bootstrap replicates (resampling with
/// replacement) and their summary.
///
/// Replicates are seeded by index, so the output does not depend on how
/// the rayon pool schedules them.
pub fn qs_entropy_bootstrap<T: Real>(sample: &SampleSet<T>, cfg: &QsConfig) -> Result<EntropyEstimate<T>> {
    let point = qs_entropy(sample, cfg)?;
    let values = sample.values();
    let outcomes: Vec<Option<T>> = (0..cfg.n_bootstrap as u64)
        .into_par_iter()
        .map(|r| bootstrap_replicate(values, cfg, r))
        .collect();
    let failed = outcomes.iter().filter(|o| o.is_none()).count();
    if failed as f64 > BOOTSTRAP_MAX_FAILURE_RATE * cfg.n_bootstrap as f64 {
        return Err(Error::BootstrapUnstable { failed, replicates: cfg.n_bootstrap });
    }
    let replicates: Vec<T> = outcomes.into_iter().flatten().collect();
    let summary = if replicates.len() >= 2 { Some(box_stats(&replicates)?) } else { None };
    Ok(EntropyEstimate { point, bootstrap_values: Some(replicates), summary, failed_replicates: failed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use proptest::prelude::*;

    fn gaussian_sample(n: usize, seed: u64) -> SampleSet<f64> {
        DistributionSpec::<f64>::unit_gaussian().sample(n, seed)
    }

    #[test]
    fn alpha_resolution() {
        assert_eq!(QuantileCount::Fraction(0.25).resolve(1000).unwrap(), 250);
        assert_eq!(QuantileCount::Fraction(0.25).resolve(2).unwrap(), 2);
        assert_eq!(QuantileCount::Fraction(0.25).resolve(10).unwrap(), 3);
        assert!(QuantileCount::Fraction(0.0).resolve(10).is_err());
        assert!(QuantileCount::Fraction(1.5).resolve(10).is_err());
        assert!(QuantileCount::Count(1).resolve(10).is_err());
    }

    #[test]
    fn subset_drawer_yields_distinct_sorted_indices() {
        let mut rng = rng_from_seed(3);
        for &(n, m) in &[(10, 1), (10, 9), (64, 32), (65, 40), (130, 129), (1000, 250), (1000, 700)] {
            let mut drawer = SubsetDrawer::new(n);
            for _ in 0..20 {
                let mut seen = Vec::new();
                drawer.for_each_sorted(m, &mut rng, |rank, i| {
                    assert_eq!(rank, seen.len());
                    seen.push(i);
                });
                assert_eq!(seen.len(), m);
                assert!(seen.windows(2).all(|w| w[0] < w[1]));
                assert!(*seen.last().unwrap() < n);
            }
            assert!(drawer.bits.iter().all(|&w| w == 0));
        }
    }

    #[test]
    fn subset_drawer_is_uniform_over_indices() {
        // Each index should be selected with probability m / n.
        let (n, m, trials) = (20, 7, 40_000);
        let mut counts = vec![0usize; n];
        let mut drawer = SubsetDrawer::new(n);
        let mut rng = rng_from_seed(11);
        for _ in 0..trials {
            drawer.for_each_sorted(m, &mut rng, |_, i| counts[i] += 1);
        }
        let expected = trials as f64 * m as f64 / n as f64;
        let sd = (expected * (1.0 - m as f64 / n as f64)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 5.0 * sd, "{c} vs {expected}");
        }
    }

    #[test]
    fn two_quantiles_average_single_draws() {
        let sample = SampleSet::new(vec![0.0, 1.0, 2.0, 3.0, 10.0]).unwrap();
        let mut rng = rng_from_seed(5);
        let q = estimate_quantiles(&sample, 2, 3, &mut rng).unwrap();
        assert_eq!(q.points().len(), 3);
        assert_eq!(q.points()[0], 0.0);
        assert_eq!(q.points()[2], 10.0);
        // Replay the same three single-index draws.
        let mut replay = rng_from_seed(5);
        let mut drawer = SubsetDrawer::new(5);
        let sorted = sample.sorted();
        let mut total = 0.0;
        for _ in 0..3 {
            drawer.for_each_sorted(1, &mut replay, |_, i| total += sorted[i]);
        }
        assert_eq!(q.points()[1], total / 3.0);
    }

    #[test]
    fn shape_errors() {
        let s = SampleSet::new(vec![1.0, 2.0, 3.0]).unwrap();
        let mut rng = rng_from_seed(1);
        assert!(matches!(estimate_quantiles(&s, 5, 10, &mut rng), Err(Error::InsufficientSample(_))));
        assert!(matches!(estimate_quantiles(&s, 1, 10, &mut rng), Err(Error::Domain(_))));
        let flat = SampleSet::new(vec![5.0; 10]).unwrap();
        assert_eq!(estimate_quantiles(&flat, 3, 10, &mut rng).unwrap_err(), Error::DegenerateSample);
        assert_eq!(qs_entropy(&flat, &QsConfig::default()).unwrap_err(), Error::DegenerateSample);
    }

    #[test]
    fn equally_spaced_unit_quantiles_give_zero() {
        for n in [1usize, 2, 4, 64, 1024] {
            let z: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
            let q = QuantileEstimate::from_points(z).unwrap();
            assert_eq!(entropy_from_quantiles(&q).unwrap(), 0.0, "N_Z = {n}");
        }
        for n in [3usize, 10, 333] {
            let z: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
            let h = entropy_from_quantiles(&QuantileEstimate::from_points(z).unwrap()).unwrap();
            assert!(h.abs() < 1e-15, "N_Z = {n}: {h}");
        }
    }

    #[test]
    fn zero_spacing_is_reported() {
        let q = QuantileEstimate::from_points(vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(entropy_from_quantiles(&q).unwrap_err(), Error::ZeroSpacing { index: 2 });
        assert!(QuantileEstimate::from_points(vec![0.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn quantile_scaling_adds_log_k() {
        let z = vec![-1.0, -0.2, 0.1, 0.5, 2.0];
        let base = entropy_from_quantiles(&QuantileEstimate::from_points(z.clone()).unwrap()).unwrap();
        for k in [0.5, 3.0, 1e4] {
            let scaled = QuantileEstimate::from_points(z.iter().map(|v| v * k).collect()).unwrap();
            assert!((entropy_from_quantiles(&scaled).unwrap() - base - f64::ln(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_gaussian_quantiles_recover_unit_entropy() {
        use crate::oracle::{theoretical_quantiles, OracleConfig};
        let z = theoretical_quantiles(&DistributionSpec::<f64>::unit_gaussian(), 1000, &OracleConfig::default()).unwrap();
        let h = entropy_from_quantiles(&QuantileEstimate::from_points(z).unwrap()).unwrap();
        assert!((h - 1.0).abs() < 0.01, "{h}");
    }

    #[test]
    fn estimate_is_deterministic_and_seed_sensitive() {
        let s = gaussian_sample(300, 1);
        let cfg = QsConfig::default().with_seed(77);
        assert_eq!(qs_entropy(&s, &cfg).unwrap(), qs_entropy(&s, &cfg).unwrap());
        assert_ne!(qs_entropy(&s, &cfg).unwrap(), qs_entropy(&s, &cfg.with_seed(78)).unwrap());
    }

    #[test]
    fn affine_maps_shift_by_log_scale() {
        let s = gaussian_sample(400, 9);
        let cfg = QsConfig::default().with_seed(4);
        let base = qs_entropy(&s, &cfg).unwrap();
        for &(a, k) in &[(0.0, 0.1), (0.0, 2.0), (0.0, 1000.0), (3.7, 1.0), (-12.0, 2.5)] {
            let h = qs_entropy(&s.affine(a, k).unwrap(), &cfg).unwrap();
            assert!((h - base - f64::ln(k)).abs() < 1e-12, "a={a} k={k}: {h} vs {base}");
        }
    }

    #[test]
    fn permuting_the_sample_leaves_the_estimate_unchanged() {
        let s = gaussian_sample(200, 12);
        let mut v = s.values().to_vec();
        v.reverse();
        v.rotate_left(37);
        let cfg = QsConfig::default().with_seed(8);
        assert_eq!(qs_entropy(&s, &cfg).unwrap(), qs_entropy(&SampleSet::new(v).unwrap(), &cfg).unwrap());
    }

    #[test]
    fn bootstrap_contract() {
        let s = gaussian_sample(120, 5);
        let cfg = QsConfig::default().with_seed(21).with_bootstrap(40).with_subsamples(50);
        let est = qs_entropy_bootstrap(&s, &cfg).unwrap();
        let values = est.bootstrap_values.as_ref().unwrap();
        assert_eq!(values.len(), 40);
        assert!(values.iter().all(|v| v.is_finite()));
        assert_eq!(est.failed_replicates, 0);
        let summary = est.summary.unwrap();
        assert!(summary.q25 <= summary.median && summary.median <= summary.q75);
        assert_eq!(est.point, qs_entropy(&s, &cfg).unwrap());
        assert_eq!(est, qs_entropy_bootstrap(&s, &cfg).unwrap());
    }

    #[test]
    fn bootstrap_independent_of_thread_count() {
        let s = gaussian_sample(150, 6);
        let cfg = QsConfig::default().with_seed(2).with_bootstrap(24).with_subsamples(30);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| qs_entropy_bootstrap(&s, &cfg).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn single_precision_estimate() {
        let s = DistributionSpec::<f32>::unit_gaussian().sample(2000, 3);
        let h = qs_entropy(&s, &QsConfig::default().with_seed(1)).unwrap();
        assert!((h - 1.0).abs() < 0.1, "{h}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn quantile_estimates_are_monotone_and_bounded(
            values in prop::collection::vec(-100.0f64..100.0, 3..80),
            alpha in 0.05f64..1.0,
            n_k in 1usize..20,
            seed in any::<u64>(),
        ) {
            let s = SampleSet::new(values).unwrap();
            prop_assume!(s.support().is_ok());
            let (lo, hi) = s.support().unwrap();
            let n_z = QuantileCount::Fraction(alpha).resolve(s.len()).unwrap().min(s.len() + 1);
            let q = estimate_quantiles(&s, n_z, n_k, &mut rng_from_seed(seed)).unwrap();
            let z = q.points();
            prop_assert_eq!(z.len(), n_z + 1);
            prop_assert_eq!(z[0], lo);
            prop_assert_eq!(z[n_z], hi);
            prop_assert!(z.windows(2).all(|w| w[0] <= w[1]));
            let total: f64 = q.spacings().sum();
            prop_assert!((total - (hi - lo)).abs() <= 1e-9 * (hi - lo));
            if let Ok(h) = entropy_from_quantiles(&q) {
                prop_assert!(h <= (hi - lo).ln() + 1e-12);
            }
        }

        #[test]
        fn translation_invariance(shift in -1e3f64..1e3, seed in any::<u64>()) {
            let s = gaussian_sample(150, seed);
            let cfg = QsConfig::default().with_subsamples(40).with_seed(seed);
            let h = qs_entropy(&s, &cfg).unwrap();
            let moved = qs_entropy(&s.affine(shift, 1.0).unwrap(), &cfg).unwrap();
            prop_assert!((h - moved).abs() < 1e-12 * (1.0 + shift.abs()));
        }
    }
}
