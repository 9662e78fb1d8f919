use serde::{Deserialize, Serialize};

use qse_core::{Distribution, DEFAULT_SEED};

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qs,
    Bc,
    Kd,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Qs => "qs",
            Method::Bc => "bc",
            Method::Kd => "kd",
        }
    }

    /// Grid swept by default: `α` for QS, bin fraction of `N_S` for BC, and
    /// `K = σ_K·√N_S` for KD.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Method::Qs => DEFAULT_ALPHA_GRID.to_vec(),
            Method::Bc => DEFAULT_BIN_FRACTION_GRID.to_vec(),
            Method::Kd => DEFAULT_K_GRID.to_vec(),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

pub const DEFAULT_SAMPLE_SIZES: [usize; 6] = [100, 200, 500, 1000, 2000, 5000];
pub const DEFAULT_REPETITIONS: usize = 500;
pub const DEFAULT_ALPHA_GRID: [f64; 12] = [0.02, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.50, 0.60, 0.70];
pub const DEFAULT_BIN_FRACTION_GRID: [f64; 11] =
    [0.005, 0.01, 0.02, 0.03, 0.05, 0.075, 0.10, 0.15, 0.20, 0.30, 0.50];
pub const DEFAULT_K_GRID: [f64; 17] =
    [0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 50.0];

/// One Monte-Carlo experiment over a hyperparameter grid and a set of
/// sample sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: Distribution,
    pub method: Method,
    pub sample_sizes: Vec<usize>,
    pub repetitions: usize,
    pub grid: Vec<f64>,
    pub base_seed: u64,
    /// `N_K` for QS runs.
    pub n_subsamples: usize,
}

impl ExperimentConfig {
    pub fn new(spec: Distribution, method: Method) -> Self {
        Self {
            spec,
            method,
            sample_sizes: DEFAULT_SAMPLE_SIZES.to_vec(),
            repetitions: DEFAULT_REPETITIONS,
            grid: method.default_grid(),
            base_seed: DEFAULT_SEED,
            n_subsamples: 500,
        }
    }

    pub fn with_sample_sizes(mut self, sizes: &[usize]) -> Self {
        self.sample_sizes = sizes.to_vec();
        self
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Self {
        self.repetitions = repetitions;
        self
    }

    pub fn with_grid(mut self, grid: &[f64]) -> Self {
        self.grid = grid.to_vec();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.repetitions < 2 {
            return Err(BenchError::Config(format!("repetitions must be at least 2, got {}", self.repetitions)));
        }
        if self.grid.is_empty() {
            return Err(BenchError::Config("hyperparameter grid is empty".into()));
        }
        if let Some(g) = self.grid.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(BenchError::Config(format!("grid values must be positive, got {g}")));
        }
        if self.method == Method::Qs {
            if let Some(a) = self.grid.iter().find(|a| **a > 1.0) {
                return Err(BenchError::Config(format!("alpha must not exceed 1, got {a}")));
            }
        }
        if self.sample_sizes.is_empty() {
            return Err(BenchError::Config("no sample sizes given".into()));
        }
        if let Some(n) = self.sample_sizes.iter().find(|n| **n < 10) {
            return Err(BenchError::Config(format!("sample sizes must be at least 10, got {n}")));
        }
        if self.n_subsamples == 0 {
            return Err(BenchError::Config("N_K must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for m in [Method::Qs, Method::Bc, Method::Kd] {
            let cfg = ExperimentConfig::new(Distribution::unit_gaussian(), m);
            assert!(cfg.validate().is_ok());
            assert_eq!(cfg.repetitions, 500);
            assert_eq!(cfg.sample_sizes, DEFAULT_SAMPLE_SIZES);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let base = ExperimentConfig::new(Distribution::unit_gaussian(), Method::Qs);
        assert!(base.clone().with_repetitions(1).validate().is_err());
        assert!(base.clone().with_grid(&[]).validate().is_err());
        assert!(base.clone().with_grid(&[1.5]).validate().is_err());
        assert!(base.clone().with_sample_sizes(&[5]).validate().is_err());
        assert!(base.with_grid(&[-0.1]).validate().is_err());
    }
}
