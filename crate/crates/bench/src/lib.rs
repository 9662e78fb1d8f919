//! Monte-Carlo experiments for the entropy estimators.
//!
//! Every repetition draws its sample from a seed derived from the base seed,
//! the sample size, and the repetition index, so results do not depend on
//! the number of worker threads and different methods see identical
//! samples. Repetitions run on the current rayon pool.

pub mod config;
pub mod error;
pub mod figures;
pub mod studies;
pub mod sweep;
pub mod table;

pub use config::{ExperimentConfig, Method, DEFAULT_ALPHA_GRID, DEFAULT_BIN_FRACTION_GRID, DEFAULT_K_GRID};
pub use error::{BenchError, Result};
pub use figures::{run_figure, FigureOptions, FigureOutput, FIGURE_IDS};
pub use qse_core::{box_stats, entropy_fraction_profile, BoxStats};
pub use studies::{
    bootstrap_iqr_study, compare_methods, optimal_hyperparameter_study, quantile_bias_study, IqrCell, MethodCell,
    OptimumCell, QuantileCell,
};
pub use sweep::{first_sign_change, run_bias_sweep, zero_crossing, BiasCurve, Cell, Crossing};
pub use table::{read_csv, read_json, write_csv, write_json, Record};
