//! Differential entropy estimation from samples.
//!
//! The centerpiece is the quantile-spacing estimator ([`qs`]), which models
//! the density as piecewise constant between averaged sample quantiles and
//! comes with a bootstrap for sampling uncertainty. Equal-width bin
//! counting ([`bc`]) and Gaussian kernel density ([`kd`]) estimators serve as
//! baselines, and [`oracle`] supplies ground truth for the analytic models
//! in [`distributions`].
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.
//!
//! ```
//! use qse_core::{qs_entropy, Distribution, QsConfig};
//!
//! let sample = Distribution::unit_gaussian().sample(2_000, 7);
//! let h = qs_entropy(&sample, &QsConfig::default()).unwrap();
//! assert!((h - 1.0).abs() < 0.1);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod bc;
pub mod distributions;
pub mod error;
pub mod kd;
pub mod oracle;
pub mod qs;
pub mod quadrature;
pub mod sample;
pub mod scalar;
pub mod seed;
pub mod special;
pub mod stats;

pub use bc::{bc_entropy, build_histogram, default_bin_grid, tune_bins_loo, BinSpec, Histogram};
pub use distributions::{DistributionSpec, MixtureComponent};
pub use error::{Error, Result};
pub use kd::{default_bandwidth_grid, kd_entropy, kde_density, loo_log_likelihood, tune_bandwidth, Bandwidth};
pub use oracle::{
    bc_theoretical_entropy, converge_entropy, entropy_by_quadrature, entropy_fraction_profile, qs_theoretical_entropy,
    Convergence, OracleConfig, DEFAULT_CONVERGENCE_TOL,
};
pub use qs::{
    entropy_from_quantiles, estimate_quantiles, qs_entropy, qs_entropy_bootstrap, EntropyEstimate, QsConfig,
    QuantileCount, QuantileEstimate,
};
pub use sample::SampleSet;
pub use scalar::Real;
pub use seed::{derive_seed, rng_from_seed, stream_id, StreamRng, DEFAULT_SEED};
pub use stats::{box_stats, interpolated_quantile, BoxStats};

pub type Distribution = DistributionSpec<f64>;
pub type Sample = SampleSet<f64>;
pub type Quantiles = QuantileEstimate<f64>;
pub type Estimate = EntropyEstimate<f64>;
pub type Summary = BoxStats<f64>;

pub type DistributionF32 = DistributionSpec<f32>;
pub type SampleF32 = SampleSet<f32>;
pub type QuantilesF32 = QuantileEstimate<f32>;
pub type EstimateF32 = EntropyEstimate<f32>;
