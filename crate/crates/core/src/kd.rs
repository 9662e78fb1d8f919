//! Gaussian Parzen-window density and entropy estimation.
//!
//! The entropy is the resubstitution average of `−ln p̂` at the sample
//! points, self term included; bandwidths are tuned by leave-one-out
//! likelihood.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::SampleSet;
use crate::scalar::Real;

/// Bandwidth given directly or as `K` with `σ_K = K / √N_S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Sigma(f64),
    CapitalK(f64),
}

impl Bandwidth {
    pub fn resolve(&self, n_samples: usize) -> Result<f64> {
        let (v, what) = match *self {
            Bandwidth::Sigma(s) => (s, "sigma_k"),
            Bandwidth::CapitalK(k) => (k / (n_samples as f64).sqrt(), "K"),
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("{what} must be positive and finite")))
        }
    }
}

pub const DEFAULT_GRID_POINTS: usize = 25;
pub const DEFAULT_GRID_SPAN: (f64, f64) = (0.05, 5.0);

/// `DEFAULT_GRID_POINTS` log-spaced bandwidths spanning
/// `DEFAULT_GRID_SPAN` times the sample standard deviation.
pub fn default_bandwidth_grid<T: Real>(sample: &SampleSet<T>) -> Vec<T> {
    let sd = sample.std_dev().as_f64();
    let (lo, hi) = DEFAULT_GRID_SPAN;
    let step = (hi / lo).ln() / (DEFAULT_GRID_POINTS - 1) as f64;
    (0..DEFAULT_GRID_POINTS)
        .map(|i| T::lit(sd * lo * (step * i as f64).exp()))
        .collect()
}

const SQRT_TAU: f64 = 2.506_628_274_631_000_7;

/// Largest `u²/2` whose kernel `exp(−u²/2)` is still a normal double.
const NORMAL_CUTOFF: f64 = 708.0;

/// `exp(−x)` for `0 ≤ x ≤ NORMAL_CUTOFF`, within a few ulps.
///
/// Branch-free so the pair loop below vectorizes.
#[inline(always)]
fn exp_neg(x: f64) -> f64 {
    const SHIFTER: f64 = 6_755_399_441_055_744.0; // 1.5 · 2^52
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    let t = -x * std::f64::consts::LOG2_E + SHIFTER;
    let n = t - SHIFTER;
    let r = (-x - n * LN2_HI) - n * LN2_LO;
    // Taylor series of e^r on |r| ≤ ln2 / 2, truncated after r^12.
    let mut p = 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    // The low bits of `t` hold n; rebuild 2^n from them.
    let scale = f64::from_bits(t.to_bits().wrapping_add(1023) << 52);
    p * scale
}

/// Kernel mass each sorted point receives from the others:
/// `r_i = Σ_{m≠i} exp(−(x_i − x_m)² / 2σ²)`, accumulated in `f64`.
///
/// Dispatches to direct pair sums or a truncated Gauss-transform series,
/// whichever is cheaper for this bandwidth. Both agree to rounding.
fn neighbour_mass<T: Real>(sorted: &[T], sigma: T) -> Vec<f64> {
    let x: Vec<f64> = sorted.iter().map(|v| v.as_f64()).collect();
    let sigma = sigma.as_f64();
    if series_cost(&x, sigma) < direct_cost(&x, sigma) {
        series_mass(&x, sigma)
    } else {
        direct_mass(&x, sigma)
    }
}

/// Half-width, in units of σ, beyond which a pair's kernel is not a
/// normal double.
fn direct_reach(sigma: f64) -> f64 {
    sigma * (2.0 * NORMAL_CUTOFF).sqrt()
}

fn direct_cost(x: &[f64], sigma: f64) -> f64 {
    let reach = direct_reach(sigma);
    let mut end = 0;
    let mut pairs = 0usize;
    for (i, &xi) in x.iter().enumerate() {
        end = end.max(i + 1);
        while end < x.len() && x[end] - xi <= reach {
            end += 1;
        }
        pairs += end - i - 1;
    }
    pairs as f64
}

/// Each pair is visited once; pairs whose kernel falls below the smallest
/// normal double are skipped.
fn direct_mass(x: &[f64], sigma: f64) -> Vec<f64> {
    let n = x.len();
    let scale = 0.5 / (sigma * sigma);
    let reach = direct_reach(sigma);
    let mut mass = vec![0.0; n];
    let mut end = 0;
    for i in 0..n {
        let xi = x[i];
        end = end.max(i + 1);
        while end < n && x[end] - xi <= reach {
            end += 1;
        }
        let (head, tail) = mass.split_at_mut(i + 1);
        head[i] += pair_row(&x[i + 1..end], &mut tail[..end - i - 1], xi, scale);
    }
    mass
}

/// Adds each kernel value `exp(−(x_j − xi)² · scale)` into `mass[j]` and
/// returns their sum.
#[inline]
fn pair_row(xs: &[f64], mass: &mut [f64], xi: f64, scale: f64) -> f64 {
    let mut lanes = [0.0; 4];
    let mut mc = mass.chunks_exact_mut(4);
    let mut xc = xs.chunks_exact(4);
    for (m, v) in (&mut mc).zip(&mut xc) {
        for l in 0..4 {
            let d = v[l] - xi;
            let k = exp_neg((d * d * scale).min(NORMAL_CUTOFF));
            lanes[l] += k;
            m[l] += k;
        }
    }
    let mut acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (m, &v) in mc.into_remainder().iter_mut().zip(xc.remainder()) {
        let d = v - xi;
        let k = exp_neg((d * d * scale).min(NORMAL_CUTOFF));
        acc += k;
        *m += k;
    }
    acc
}

/// Neighbour mass of the single point `i` by direct summation.
fn direct_point(x: &[f64], i: usize, sigma: f64) -> f64 {
    let scale = 0.5 / (sigma * sigma);
    let reach = direct_reach(sigma);
    let lo = x.partition_point(|&v| v < x[i] - reach);
    let hi = x.partition_point(|&v| v <= x[i] + reach);
    (lo..hi)
        .filter(|&j| j != i)
        .map(|j| {
            let d = x[j] - x[i];
            exp_neg((d * d * scale).min(NORMAL_CUTOFF))
        })
        .sum()
}

/// Taylor terms kept per cluster.
const SERIES_TERMS: usize = 24;
/// Clusters whose centre lies further than this many σ from a target are
/// ignored; their kernels are below `e^−60`.
const SERIES_REACH: f64 = 11.5;
/// Series results below this are recomputed directly, since they come from
/// subtracting the self term from a sum of order one.
const SERIES_FLOOR: f64 = 1e-6;

fn series_cost(x: &[f64], sigma: f64) -> f64 {
    let n = x.len() as f64;
    let clusters = ((x[x.len() - 1] - x[0]) / sigma).floor() + 1.0;
    let visited = clusters.min(2.0 * SERIES_REACH + 2.0);
    n * SERIES_TERMS as f64 * (1.0 + visited / 4.0)
}

struct Cluster {
    centre: f64,
    moments: [f64; SERIES_TERMS],
}

/// Width-σ clusters with moments `A_k = Σ_y e^{−b²/2} b^k / k!`, where
/// `b = (y − centre) / σ` lies in `[−½, ½)`.
fn clusters(x: &[f64], sigma: f64) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < x.len() {
        let centre = x[start] + 0.5 * sigma;
        let mut moments = [0.0; SERIES_TERMS];
        let mut end = start;
        while end < x.len() && (end == start || x[end] < x[start] + sigma) {
            let b = (x[end] - centre) / sigma;
            let mut t = (-0.5 * b * b).exp();
            for (k, m) in moments.iter_mut().enumerate() {
                *m += t;
                t *= b / (k + 1) as f64;
            }
            end += 1;
        }
        out.push(Cluster { centre, moments });
        start = end;
    }
    out
}

/// Expands `exp(−(a − b)²/2) = e^{−a²/2} e^{−b²/2} Σ_k (ab)^k / k!` around
/// each cluster centre; the truncation error per kernel is below 1e-19.
fn series_mass(x: &[f64], sigma: f64) -> Vec<f64> {
    let clusters = clusters(x, sigma);
    let reach = SERIES_REACH * sigma;
    let (mut lo, mut hi) = (0, 0);
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            while clusters[lo].centre < xi - reach {
                lo += 1;
            }
            while hi < clusters.len() && clusters[hi].centre <= xi + reach {
                hi += 1;
            }
            let total: f64 = clusters[lo..hi]
                .iter()
                .map(|c| {
                    let a = (xi - c.centre) / sigma;
                    let poly = c.moments.iter().rev().fold(0.0, |acc, &m| acc * a + m);
                    (-0.5 * a * a).exp() * poly
                })
                .sum();
            let others = total - 1.0;
            if others < SERIES_FLOOR {
                direct_point(x, i, sigma)
            } else {
                others
            }
        })
        .collect()
}

fn check_bandwidth<T: Real>(sigma: T) -> Result<()> {
    if sigma > T::zero() && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("kernel standard deviation must be positive, got {sigma}")))
    }
}

fn check_nonempty<T: Real>(sample: &SampleSet<T>) -> Result<()> {
    if sample.is_empty() {
        Err(Error::InsufficientSample("kernel density needs at least one value".into()))
    } else {
        Ok(())
    }
}

/// `p̂(x) = (1/N_S) Σ_i φ((x − s_i)/σ) / σ`.
pub fn kde_density<T: Real>(sample: &SampleSet<T>, sigma: T, x: T) -> Result<T> {
    check_bandwidth(sigma)?;
    check_nonempty(sample)?;
    let half = T::lit(0.5);
    let total: T = sample
        .values()
        .iter()
        .map(|&s| {
            let u = (x - s) / sigma;
            (-half * u * u).exp()
        })
        .sum();
    Ok(total / (T::from_count(sample.len()) * sigma * T::lit(SQRT_TAU)))
}

/// Resubstitution entropy `(1/N_S) Σ_i −ln p̂(s_i)` including each point's
/// own kernel.
pub fn kd_entropy<T: Real>(sample: &SampleSet<T>, sigma: T) -> Result<T> {
    check_bandwidth(sigma)?;
    check_nonempty(sample)?;
    let n = sample.len();
    let mass = neighbour_mass(&sample.sorted(), sigma);
    let mean_log = mass.iter().map(|&r| r.ln_1p()).sum::<f64>() / n as f64;
    Ok(T::lit((n as f64 * sigma.as_f64() * SQRT_TAU).ln() - mean_log))
}

/// `Σ_i ln( (1/(N_S−1)) Σ_{m≠i} φ((s_i − s_m)/σ) / σ )`.
///
/// Returns `−∞` when some point has no kernel mass from the others.
pub fn loo_log_likelihood<T: Real>(sample: &SampleSet<T>, sigma: T) -> Result<T> {
    check_bandwidth(sigma)?;
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientSample("leave-one-out likelihood needs at least 2 values".into()));
    }
    let mass = neighbour_mass(&sample.sorted(), sigma);
    let per_point = ((n - 1) as f64 * sigma.as_f64() * SQRT_TAU).ln();
    Ok(T::lit(mass.iter().map(|&r| r.ln()).sum::<f64>() - n as f64 * per_point))
}

/// Grid bandwidth maximizing the leave-one-out likelihood; ties go to the
/// larger bandwidth.
pub fn tune_bandwidth<T: Real>(sample: &SampleSet<T>, grid: &[T]) -> Result<T> {
    if grid.is_empty() {
        return Err(Error::Domain("bandwidth grid is empty".into()));
    }
    let mut best: Option<(T, T)> = None;
    for &sigma in grid {
        let ll = loo_log_likelihood(sample, sigma)?;
        best = match best {
            Some((s, v)) if v > ll || (v == ll && s >= sigma) => Some((s, v)),
            _ => Some((sigma, ll)),
        };
    }
    Ok(best.expect("non-empty grid").0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use crate::quadrature::adaptive_simpson;
    use proptest::prelude::*;

    fn brute_loo(values: &[f64], sigma: f64) -> f64 {
        let n = values.len();
        let c = 1.0 / ((n - 1) as f64 * sigma * (2.0 * std::f64::consts::PI).sqrt());
        (0..n)
            .map(|i| {
                let s: f64 = (0..n)
                    .filter(|&m| m != i)
                    .map(|m| (-0.5 * ((values[i] - values[m]) / sigma).powi(2)).exp())
                    .sum();
                (c * s).ln()
            })
            .sum()
    }

    #[test]
    fn fast_exponential_matches_std() {
        let mut x = 0.0;
        while x <= NORMAL_CUTOFF {
            let (fast, exact) = (exp_neg(x), (-x).exp());
            assert!(((fast - exact) / exact).abs() < 4.0 * f64::EPSILON, "{x}: {fast} vs {exact}");
            x += 0.013_7;
        }
        assert_eq!(exp_neg(0.0), 1.0);
    }

    #[test]
    fn series_and_direct_sums_agree() {
        for spec in DistributionSpec::<f64>::benchmark_suite() {
            let x = spec.sample(3000, 21).sorted();
            let sd = spec.sample(3000, 21).std_dev();
            for f in [0.02, 0.1, 0.5, 3.0] {
                let (a, b) = (direct_mass(&x, f * sd), series_mass(&x, f * sd));
                for (p, q) in a.iter().zip(&b) {
                    assert!((p - q).abs() <= 1e-11 * p.max(1e-300), "{spec} {f}: {p} vs {q}");
                }
            }
        }
    }

    #[test]
    fn isolated_points_keep_their_tiny_mass() {
        let x = [0.0, 0.01, 0.02, 0.03, 9.0];
        let m = series_mass(&x, 1.0);
        let expect: f64 = x[..4].iter().map(|v| (-0.5 * (9.0 - v) * (9.0 - v)).exp()).sum();
        assert!((m[4] / expect - 1.0).abs() < 1e-12, "{} vs {expect}", m[4]);
    }

    #[test]
    fn single_point_density_and_entropy() {
        let s = SampleSet::new(vec![0.0]).unwrap();
        assert!((kde_density(&s, 1.0, 0.0).unwrap() - 0.398_942_280_4f64).abs() < 1e-10);
        for sigma in [0.01, 1.0, 7.0] {
            let h = kd_entropy(&s, sigma).unwrap();
            assert!((h - (sigma * (2.0 * std::f64::consts::PI).sqrt()).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_sample_gives_symmetric_density() {
        let s = SampleSet::new(vec![-1.0, 1.0]).unwrap();
        for x in [0.1, 0.7, 2.5] {
            let a: f64 = kde_density(&s, 0.6, x).unwrap();
            let b = kde_density(&s, 0.6, -x).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let s = SampleSet::new(vec![-2.0, 0.5, 0.6, 3.0]).unwrap();
        let sigma = 0.4;
        let (lo, hi) = (-2.0 - 10.0 * sigma - 5.0, 3.0 + 10.0 * sigma + 5.0);
        let mass: f64 = adaptive_simpson(|x| kde_density(&s, sigma, x).unwrap(), lo, hi, 1e-10).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn loo_matches_brute_force() {
        let s = DistributionSpec::<f64>::unit_exponential().sample(80, 4);
        for sigma in [0.05, 0.3, 2.0] {
            let fast = loo_log_likelihood(&s, sigma).unwrap();
            let slow = brute_loo(s.values(), sigma);
            assert!((fast - slow).abs() < 1e-9 * slow.abs().max(1.0), "{fast} vs {slow}");
        }
    }

    #[test]
    fn entropy_matches_brute_force() {
        let s = DistributionSpec::<f64>::bimodal().sample(60, 8);
        let sigma = 0.7;
        let brute: f64 = s.values().iter().map(|&x| -kde_density(&s, sigma, x).unwrap().ln()).sum::<f64>() / 60.0;
        assert!((kd_entropy(&s, sigma).unwrap() - brute).abs() < 1e-12);
    }

    #[test]
    fn two_point_optimum_is_unit_bandwidth() {
        // Each point sees the other at distance 1: per-point objective
        // −ln σ − 1/(2σ²), maximized at σ = 1.
        let s = SampleSet::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(tune_bandwidth(&s, &[0.5, 1.0, 2.0]).unwrap(), 1.0);
        let at = |sigma: f64| loo_log_likelihood(&s, sigma).unwrap();
        assert!(at(1.0) > at(0.99) && at(1.0) > at(1.01));
    }

    #[test]
    fn vanishing_bandwidth_sends_objective_to_minus_infinity() {
        let s = SampleSet::new(vec![0.0, 1.0, 2.5]).unwrap();
        assert!(loo_log_likelihood(&s, 1e-3).unwrap() < -1e5);
        assert_eq!(loo_log_likelihood(&s, 1e-200).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn small_bandwidth_biases_entropy_low() {
        let spec = DistributionSpec::<f64>::unit_gaussian();
        let s = spec.sample(1000, 10);
        let h = kd_entropy(&s, 1e-4 * s.std_dev()).unwrap();
        assert!(h < 0.0, "{h}");
    }

    #[test]
    fn tuning_contract() {
        let s = DistributionSpec::<f64>::unit_gaussian().sample(300, 2);
        assert_eq!(tune_bandwidth(&s, &[0.3]).unwrap(), 0.3);
        assert!(tune_bandwidth::<f64>(&s, &[]).is_err());
        let grid = default_bandwidth_grid(&s);
        assert_eq!(grid.len(), DEFAULT_GRID_POINTS);
        let best = tune_bandwidth(&s, &grid).unwrap();
        assert!(best > grid[0] && best < grid[DEFAULT_GRID_POINTS - 1]);
    }

    #[test]
    fn argument_errors() {
        let one = SampleSet::new(vec![1.0]).unwrap();
        assert!(matches!(loo_log_likelihood(&one, 1.0), Err(Error::InsufficientSample(_))));
        assert!(matches!(kd_entropy(&one, 0.0), Err(Error::Domain(_))));
        assert!(Bandwidth::CapitalK(-1.0).resolve(10).is_err());
        assert!((Bandwidth::CapitalK(3.0).resolve(100).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn entropy_grows_with_bandwidth_past_the_largest_gap() {
        let s = DistributionSpec::<f64>::unit_lognormal().sample(150, 13);
        let sorted = s.sorted();
        let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..12 {
            let sigma = gap * 1.5f64.powi(i);
            let h = kd_entropy(&s, sigma).unwrap();
            assert!(h > prev, "sigma {sigma}");
            prev = h;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn scale_equivariance(seed in any::<u64>(), k in prop::sample::select(vec![0.1, 2.0, 1000.0]), sigma in 0.05f64..2.0) {
            let s = DistributionSpec::<f64>::unit_gaussian().sample(60, seed);
            let h = kd_entropy(&s, sigma).unwrap();
            let scaled = kd_entropy(&s.affine(0.0, k).unwrap(), k * sigma).unwrap();
            prop_assert!((scaled - h - k.ln()).abs() < 1e-12);
        }

        #[test]
        fn density_positive_at_samples(values in prop::collection::vec(-10.0f64..10.0, 1..30), sigma in 0.01f64..5.0) {
            let s = SampleSet::new(values.clone()).unwrap();
            for &x in &values {
                prop_assert!(kde_density(&s, sigma, x).unwrap() > 0.0);
            }
        }

        #[test]
        fn loo_ignores_order(values in prop::collection::vec(-3.0f64..3.0, 2..40), sigma in 0.05f64..3.0) {
            let s = SampleSet::new(values.clone()).unwrap();
            let mut rev = values;
            rev.reverse();
            let t = SampleSet::new(rev).unwrap();
            prop_assert_eq!(loo_log_likelihood(&s, sigma).unwrap(), loo_log_likelihood(&t, sigma).unwrap());
        }
    }
}
