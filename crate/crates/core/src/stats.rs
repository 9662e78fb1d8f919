//! Order-statistic summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Quantile of ascending `sorted` data by linear interpolation between
/// order statistics, placing probability `p` at rank `1 + p·(n − 1)`.
pub fn interpolated_quantile<T: Real>(sorted: &[T], p: T) -> T {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p.max(T::zero()).min(T::one()) * T::from_count(n - 1);
    let lo = h.floor().to_usize().unwrap_or(0).min(n - 1);
    let frac = h - T::from_count(lo);
    if lo + 1 >= n || frac == T::zero() {
        return sorted[lo];
    }
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Box-plot summary of a set of replicate values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoxStats<T> {
    pub mean: T,
    pub median: T,
    pub q25: T,
    pub q75: T,
    pub iqr: T,
    pub p2_5: T,
    pub p97_5: T,
    pub std: T,
}

/// Summarizes at least two finite values.
pub fn box_stats<T: Real>(values: &[T]) -> Result<BoxStats<T>> {
    if values.len() < 2 {
        return Err(Error::Domain(format!("box statistics need at least 2 values, got {}", values.len())));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(i));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
    let q = |p: f64| interpolated_quantile(&sorted, T::lit(p));
    let (q25, q75) = (q(0.25), q(0.75));
    Ok(BoxStats {
        mean,
        median: q(0.5),
        q25,
        q75,
        iqr: q75 - q25,
        p2_5: q(0.025),
        p97_5: q(0.975),
        std: var.sqrt(),
    })
}
