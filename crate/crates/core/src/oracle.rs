//! Ground-truth machinery: numerical integration of the entropy integral and
//! the piecewise-constant entropies built from exact quantiles or exact bin
//! masses.

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Tail probability cut off each end of an unbounded support when
    /// building exact quantile or bin grids.
    pub epsilon: f64,
    /// Absolute tolerance of the entropy integral.
    pub quadrature_tol: f64,
    /// Tail probability beyond which the entropy integrand is ignored.
    pub quadrature_tail: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { epsilon: 1e-5, quadrature_tol: 1e-9, quadrature_tail: 1e-12 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 0.5), got {}", self.epsilon)));
        }
        if !(self.quadrature_tol > 0.0) || !(self.quadrature_tail > 0.0 && self.quadrature_tail < 0.5) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Support interval `[P⁻¹(tail), P⁻¹(1 − tail)]`, or the true bounds when finite.
fn truncated_support<T: Real>(spec: &DistributionSpec<T>, tail: f64) -> Result<(T, T)> {
    match spec.finite_support() {
        Some(bounds) => Ok(bounds),
        None => Ok((spec.quantile(T::lit(tail))?, spec.quantile(T::lit(1.0 - tail))?)),
    }
}

/// `-∫ p ln p dx` by adaptive Simpson over the tail-truncated support.
pub fn entropy_by_quadrature<T: Real>(spec: &DistributionSpec<T>, cfg: &OracleConfig) -> Result<T> {
    spec.validate()?;
    cfg.validate()?;
    let (lo, hi) = truncated_support(spec, cfg.quadrature_tail)?;
    // Headroom below the requested tolerance so the error estimate is not
    // itself the limiting term.
    let tol = T::lit((cfg.quadrature_tol / 16.0).max(64.0 * T::epsilon().as_f64()));
    adaptive_simpson(
        |x: T| {
            let p = spec.pdf(x);
            if p > T::zero() {
                -p * p.ln()
            } else {
                T::zero()
            }
        },
        lo,
        hi,
        tol,
    )
}

/// Exact equal-probability grid `z_0 < z_1 < … < z_{N_Z}` with
/// `P(z_j) = j / N_Z` inside and `ε`-truncated (or true) end points.
pub fn theoretical_quantiles<T: Real>(spec: &DistributionSpec<T>, n_quantiles: usize, cfg: &OracleConfig) -> Result<Vec<T>> {
    if n_quantiles < 1 {
        return Err(Error::Domain("number of quantiles must be at least 1".into()));
    }
    spec.validate()?;
    cfg.validate()?;
    let (lo, hi) = truncated_support(spec, cfg.epsilon)?;
    let n = T::from_count(n_quantiles);
    let mut z = Vec::with_capacity(n_quantiles + 1);
    z.push(lo);
    for j in 1..n_quantiles {
        z.push(spec.quantile(T::from_count(j) / n)?);
    }
    z.push(hi);
    Ok(z)
}

/// Per-interval terms `ln(N_Z · Δ_j) / N_Z` whose sum is the piecewise-constant entropy.
pub fn spacing_terms<T: Real>(edges: &[T]) -> Vec<T> {
    let n = T::from_count(edges.len() - 1);
    edges.windows(2).map(|w| (n * (w[1] - w[0])).ln() / n).collect()
}

/// Piecewise-constant entropy from exact quantiles.
pub fn qs_theoretical_entropy<T: Real>(spec: &DistributionSpec<T>, n_quantiles: usize, cfg: &OracleConfig) -> Result<T> {
    let z = theoretical_quantiles(spec, n_quantiles, cfg)?;
    Ok(spacing_terms(&z).into_iter().sum())
}

/// Percentage share of the piecewise-constant entropy carried by each
/// quantile spacing, computed from exact quantiles.
pub fn entropy_fraction_profile<T: Real>(spec: &DistributionSpec<T>, n_quantiles: usize, cfg: &OracleConfig) -> Result<Vec<T>> {
    if n_quantiles < 2 {
        return Err(Error::Domain("entropy fraction profile needs at least 2 quantiles".into()));
    }
    let z = theoretical_quantiles(spec, n_quantiles, cfg)?;
    let terms = spacing_terms(&z);
    let total: T = terms.iter().copied().sum();
    let hundred = T::lit(100.0);
    Ok(terms.into_iter().map(|t| hundred * t / total).collect())
}

/// Equal-width histogram entropy built from exact bin masses.
pub fn bc_theoretical_entropy<T: Real>(spec: &DistributionSpec<T>, n_bins: usize, cfg: &OracleConfig) -> Result<T> {
    if n_bins < 1 {
        return Err(Error::Domain("number of bins must be at least 1".into()));
    }
    spec.validate()?;
    cfg.validate()?;
    let (lo, hi) = truncated_support(spec, cfg.epsilon)?;
    let width = (hi - lo) / T::from_count(n_bins);
    let edge = |j: usize| if j == n_bins { hi } else { lo + T::from_count(j) * width };
    let masses: Vec<T> = (1..=n_bins)
        .map(|j| (spec.cdf(edge(j)) - spec.cdf(edge(j - 1))).max(T::zero()))
        .collect();
    let total: T = masses.iter().copied().sum();
    let discrete: T = masses
        .iter()
        .filter(|&&m| m > T::zero())
        .map(|&m| {
            let q = m / total;
            -q * q.ln()
        })
        .sum();
    Ok(discrete + width.ln())
}

/// Converged piecewise-constant entropy and the quantile count reached.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Convergence<T> {
    pub entropy: T,
    pub n_quantiles: usize,
}

/// Default convergence tolerance: agreement to three decimal places.
pub const DEFAULT_CONVERGENCE_TOL: f64 = 5e-4;
const FIRST_QUANTILE_COUNT: usize = 16;
const MAX_QUANTILE_COUNT: usize = 1 << 24;

/// Doubles `N_Z` from 16 until two consecutive doublings change the
/// piecewise-constant entropy by less than `tol`.
pub fn converge_entropy<T: Real>(spec: &DistributionSpec<T>, cfg: &OracleConfig, tol: f64) -> Result<Convergence<T>> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let mut n = FIRST_QUANTILE_COUNT;
    let mut previous = qs_theoretical_entropy(spec, n, cfg)?;
    let mut settled = 0;
    while n < MAX_QUANTILE_COUNT {
        n *= 2;
        let current = qs_theoretical_entropy(spec, n, cfg)?;
        if (current - previous).abs().as_f64() < tol {
            settled += 1;
            if settled == 2 {
                return Ok(Convergence { entropy: current, n_quantiles: n });
            }
        } else {
            settled = 0;
        }
        previous = current;
    }
    Err(Error::ConvergenceFailure { max_quantiles: MAX_QUANTILE_COUNT })
}
