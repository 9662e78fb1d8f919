//! Analytic test distributions: density, cdf, quantile, sampling and
//! ground-truth entropy.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{entropy_by_quadrature, OracleConfig};
use crate::sample::SampleSet;
use crate::scalar::Real;
use crate::seed::{open_unit, rng_from_seed};
use crate::special::{std_normal_cdf, std_normal_pdf, std_normal_quantile};

/// One weighted Gaussian component of a mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MixtureComponent<T> {
    pub weight: T,
    pub mu: T,
    pub sigma: T,
}

/// Parametric model used as a data source and as ground truth.
///
/// Serialized as an internally tagged JSON object, e.g.
/// `{"type": "gaussian", "mu": 0, "sigma": 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", bound = "T: Real")]
pub enum DistributionSpec<T> {
    Gaussian { mu: T, sigma: T },
    Exponential { rate: T },
    /// `mu`, `sigma` parametrize the normal distribution of `ln X`.
    #[serde(rename = "lognormal")]
    LogNormal { mu: T, sigma: T },
    Uniform { a: T, b: T },
    #[serde(rename = "mixture")]
    GaussianMixture { components: Vec<MixtureComponent<T>> },
}

const MIXTURE_WEIGHT_TOL: f64 = 1e-12;

fn positive<T: Real>(v: T, what: &str) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!("{what} must be finite and > 0, got {v}")))
    }
}

fn finite<T: Real>(v: T, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!("{what} must be finite, got {v}")))
    }
}

impl<T: Real> DistributionSpec<T> {
    pub fn gaussian(mu: T, sigma: T) -> Result<Self> {
        Self::Gaussian { mu, sigma }.validated()
    }

    pub fn exponential(rate: T) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn lognormal(mu: T, sigma: T) -> Result<Self> {
        Self::LogNormal { mu, sigma }.validated()
    }

    pub fn uniform(a: T, b: T) -> Result<Self> {
        Self::Uniform { a, b }.validated()
    }

    pub fn mixture(components: Vec<MixtureComponent<T>>) -> Result<Self> {
        Self::GaussianMixture { components }.validated()
    }

    /// Standard deviation giving a Gaussian unit entropy: `sqrt(e / 2π)`.
    pub fn unit_entropy_sigma() -> T {
        T::lit((std::f64::consts::E / (2.0 * std::f64::consts::PI)).sqrt())
    }

    /// Gaussian with entropy exactly 1 nat.
    pub fn unit_gaussian() -> Self {
        Self::Gaussian { mu: T::zero(), sigma: Self::unit_entropy_sigma() }
    }

    /// Exponential with entropy exactly 1 nat.
    pub fn unit_exponential() -> Self {
        Self::Exponential { rate: T::one() }
    }

    /// Log-normal with entropy exactly 1 nat.
    pub fn unit_lognormal() -> Self {
        Self::LogNormal { mu: T::zero(), sigma: Self::unit_entropy_sigma() }
    }

    /// Equal-weight two-component mixture with means 1 and 5 and variances
    /// 5 and 1 respectively (entropy ≈ 2.2647 nats).
    pub fn bimodal() -> Self {
        let half = T::lit(0.5);
        Self::GaussianMixture {
            components: vec![
                MixtureComponent { weight: half, mu: T::one(), sigma: T::lit(5f64.sqrt()) },
                MixtureComponent { weight: half, mu: T::lit(5.0), sigma: T::one() },
            ],
        }
    }

    /// The four benchmark models: three unimodal unit-entropy shapes and the bimodal mixture.
    pub fn benchmark_suite() -> Vec<Self> {
        vec![Self::unit_gaussian(), Self::unit_exponential(), Self::unit_lognormal(), Self::bimodal()]
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { mu, sigma } | Self::LogNormal { mu, sigma } => {
                finite(*mu, "mu")?;
                positive(*sigma, "sigma")
            }
            Self::Exponential { rate } => positive(*rate, "rate"),
            Self::Uniform { a, b } => {
                finite(*a, "a")?;
                finite(*b, "b")?;
                if a < b {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution(format!("uniform requires a < b, got [{a}, {b}]")))
                }
            }
            Self::GaussianMixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidDistribution("mixture has no components".into()));
                }
                let mut total = 0.0;
                for c in components {
                    positive(c.weight, "mixture weight")?;
                    finite(c.mu, "mixture mu")?;
                    positive(c.sigma, "mixture sigma")?;
                    total += c.weight.as_f64();
                }
                // f32 weights cannot be summed to 1e-12.
                let tol = MIXTURE_WEIGHT_TOL.max(4.0 * T::epsilon().as_f64());
                if (total - 1.0).abs() > tol {
                    return Err(Error::InvalidDistribution(format!("mixture weights sum to {total}, expected 1")));
                }
                Ok(())
            }
        }
    }

    /// Short family name.
    pub fn family(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Exponential { .. } => "exponential",
            Self::LogNormal { .. } => "lognormal",
            Self::Uniform { .. } => "uniform",
            Self::GaussianMixture { .. } => "mixture",
        }
    }

    /// Support bounds when both ends are finite.
    pub fn finite_support(&self) -> Option<(T, T)> {
        match self {
            Self::Uniform { a, b } => Some((*a, *b)),
            _ => None,
        }
    }

    pub fn pdf(&self, x: T) -> T {
        let x64 = x.as_f64();
        T::lit(self.pdf_f64(x64))
    }

    fn pdf_f64(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { mu, sigma } => {
                let s = sigma.as_f64();
                std_normal_pdf((x - mu.as_f64()) / s) / s
            }
            Self::Exponential { rate } => {
                let l = rate.as_f64();
                if x < 0.0 {
                    0.0
                } else {
                    l * (-l * x).exp()
                }
            }
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let s = sigma.as_f64();
                    std_normal_pdf((x.ln() - mu.as_f64()) / s) / (s * x)
                }
            }
            Self::Uniform { a, b } => {
                let (a, b) = (a.as_f64(), b.as_f64());
                if x >= a && x <= b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Self::GaussianMixture { components } => components
                .iter()
                .map(|c| {
                    let s = c.sigma.as_f64();
                    c.weight.as_f64() * std_normal_pdf((x - c.mu.as_f64()) / s) / s
                })
                .sum(),
        }
    }

    pub fn cdf(&self, x: T) -> T {
        T::lit(self.cdf_f64(x.as_f64()))
    }

    fn cdf_f64(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian { mu, sigma } => std_normal_cdf((x - mu.as_f64()) / sigma.as_f64()),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate.as_f64() * x).exp_m1()
                }
            }
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu.as_f64()) / sigma.as_f64())
                }
            }
            Self::Uniform { a, b } => {
                let (a, b) = (a.as_f64(), b.as_f64());
                ((x - a) / (b - a)).clamp(0.0, 1.0)
            }
            Self::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight.as_f64() * std_normal_cdf((x - c.mu.as_f64()) / c.sigma.as_f64()))
                .sum::<f64>()
                .min(1.0),
        }
    }

    /// Inverse cdf for `p` strictly inside (0, 1).
    pub fn quantile(&self, p: T) -> Result<T> {
        let p = p.as_f64();
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile probability must lie in (0, 1), got {p}")));
        }
        Ok(T::lit(self.quantile_f64(p)))
    }

    fn quantile_f64(&self, p: f64) -> f64 {
        match self {
            Self::Gaussian { mu, sigma } => mu.as_f64() + sigma.as_f64() * std_normal_quantile(p),
            Self::Exponential { rate } => -(-p).ln_1p() / rate.as_f64(),
            Self::LogNormal { mu, sigma } => (mu.as_f64() + sigma.as_f64() * std_normal_quantile(p)).exp(),
            Self::Uniform { a, b } => {
                let (a, b) = (a.as_f64(), b.as_f64());
                a + p * (b - a)
            }
            Self::GaussianMixture { components } => {
                let z = std_normal_quantile(p);
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for c in components {
                    let q = c.mu.as_f64() + c.sigma.as_f64() * z;
                    lo = lo.min(q);
                    hi = hi.max(q);
                }
                self.bisect_cdf(p, lo, hi)
            }
        }
    }

    // Mixture cdf is a convex combination of component cdfs, so the
    // component quantiles at p bracket the mixture quantile.
    fn bisect_cdf(&self, p: f64, mut lo: f64, mut hi: f64) -> f64 {
        if lo == hi {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
                return mid;
            }
            if self.cdf_f64(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Draws one variate by inverse-transform sampling.
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> T {
        T::lit(self.draw_f64(rng))
    }

    fn draw_f64<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::GaussianMixture { components } => {
                let u = open_unit(rng);
                let mut acc = 0.0;
                let mut chosen = &components[components.len() - 1];
                for c in components {
                    acc += c.weight.as_f64();
                    if u < acc {
                        chosen = c;
                        break;
                    }
                }
                chosen.mu.as_f64() + chosen.sigma.as_f64() * std_normal_quantile(open_unit(rng))
            }
            _ => self.quantile_f64(open_unit(rng)),
        }
    }

    /// `n` iid draws, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> SampleSet<T> {
        let mut rng = rng_from_seed(seed);
        let values = (0..n).map(|_| self.draw(&mut rng)).collect();
        SampleSet::from_trusted(values, Some(seed), Some(self.clone()))
    }

    /// Differential entropy in nats. Closed form except for mixtures,
    /// which are integrated numerically.
    pub fn true_entropy(&self) -> Result<T> {
        let half_ln_2pie = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        let h = match self {
            Self::Gaussian { sigma, .. } => half_ln_2pie + sigma.as_f64().ln(),
            Self::Exponential { rate } => 1.0 - rate.as_f64().ln(),
            Self::LogNormal { mu, sigma } => mu.as_f64() + half_ln_2pie + sigma.as_f64().ln(),
            Self::Uniform { a, b } => (b.as_f64() - a.as_f64()).ln(),
            Self::GaussianMixture { .. } => {
                return entropy_by_quadrature(self, &OracleConfig::default());
            }
        };
        Ok(T::lit(h))
    }
}

impl<T: Real> fmt::Display for DistributionSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { mu, sigma } => write!(f, "gaussian(mu={mu:.6},sigma={sigma:.6})"),
            Self::Exponential { rate } => write!(f, "exponential(rate={rate:.6})"),
            Self::LogNormal { mu, sigma } => write!(f, "lognormal(mu={mu:.6},sigma={sigma:.6})"),
            Self::Uniform { a, b } => write!(f, "uniform(a={a:.6},b={b:.6})"),
            Self::GaussianMixture { components } => {
                write!(f, "mixture(")?;
                for (i, c) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{:.6}*N({:.6},{:.6})", c.weight, c.mu, c.sigma)?;
                }
                write!(f, ")")
            }
        }
    }
}
