use thiserror::Error;

/// Errors raised by the analytic engine and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} did not converge within {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("no exact bivariate CDF for {0}; enable the numeric fallback or use the simulator")]
    UnsupportedBivariate(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("degenerate switching threshold: {0}")]
    DegenerateThreshold(String),

    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),

    #[error("quantity not defined: {0}")]
    NotDefined(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
