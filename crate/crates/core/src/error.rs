use thiserror::Error;

/// Errors raised by the performance models and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// Antenna scheme and antenna counts do not agree.
    #[error("invalid antenna configuration: {0}")]
    Config(String),

    /// The arrival rate does not satisfy `lambda < mu`.
    #[error("queue is unstable: lambda = {lambda} >= mu = {mu}")]
    Unstable { lambda: f64, mu: f64 },

    /// A constrained problem has an empty feasible set.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A numerical routine failed to produce a trustworthy answer.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(domain(format!("{name} must lie in [0, 1], got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {value}")))
    }
}
