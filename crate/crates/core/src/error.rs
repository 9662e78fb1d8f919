use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),
    #[error("degenerate sample: all values are equal")]
    DegenerateSample,
    #[error("insufficient sample: {0}")]
    InsufficientSample(String),
    #[error("zero-width quantile spacing at interval {index}")]
    ZeroSpacing { index: usize },
    #[error("bootstrap unstable: {failed} of {replicates} replicates failed")]
    BootstrapUnstable { failed: usize, replicates: usize },
    #[error("quadrature did not converge on [{lo}, {hi}]")]
    QuadratureFailure { lo: f64, hi: f64 },
    #[error("entropy did not converge before {max_quantiles} quantiles")]
    ConvergenceFailure { max_quantiles: usize },
}

impl Error {
    /// Stable identifier used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::Domain(_) => "DomainError",
            Error::NonFiniteValue(_) => "NonFiniteValue",
            Error::DegenerateSample => "DegenerateSample",
            Error::InsufficientSample(_) => "InsufficientSample",
            Error::ZeroSpacing { .. } => "ZeroSpacing",
            Error::BootstrapUnstable { .. } => "BootstrapUnstable",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
        }
    }
}
