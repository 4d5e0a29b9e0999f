//! Queue length, packet delay and average age of information of the
//! discrete-time Geo/Geo/1 queue with arrival rate `λ` and service rate `μ`.
//!
//! All quantities are in slots and exist only for `0 < λ < μ <= 1`; the
//! stability boundary is reported as [`Error::Unstable`] rather than as an
//! infinite value.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub queue_len: f64,
    pub delay_tx: f64,
    pub delay_queue: f64,
    pub delay_total: f64,
    pub aaoi: f64,
}

fn check(lambda: f64, mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(domain(format!("service rate must lie in (0, 1], got {mu}")));
    }
    if !(lambda > 0.0) {
        return Err(domain(format!("arrival rate must be > 0, got {lambda}")));
    }
    if lambda >= mu {
        return Err(Error::Unstable { lambda, mu });
    }
    Ok(())
}

/// `Q̄ = λ(1 - λ)/(μ - λ)`.
pub fn avg_queue_length(lambda: f64, mu: f64) -> Result<f64> {
    check(lambda, mu)?;
    Ok(lambda * (1.0 - lambda) / (mu - lambda))
}

/// `D = 1/μ + (1 - λ)/(μ - λ)`: transmission delay plus the Little's-law
/// queueing delay `Q̄/λ`.
pub fn avg_delay(lambda: f64, mu: f64) -> Result<f64> {
    check(lambda, mu)?;
    Ok(mu.recip() + (1.0 - lambda) / (mu - lambda))
}

/// `AAoI = 1/λ + (1 - λ)/(μ - λ) - λ/μ² + λ/μ`.
pub fn aaoi(lambda: f64, mu: f64) -> Result<f64> {
    check(lambda, mu)?;
    Ok(aaoi_unchecked(lambda, mu))
}

pub(crate) fn aaoi_unchecked(lambda: f64, mu: f64) -> f64 {
    lambda.recip() + (1.0 - lambda) / (mu - lambda) - lambda / (mu * mu) + lambda / mu
}

/// `∂AAoI/∂λ = (μ - 1)/μ² + (1 - μ)/(μ - λ)² - 1/λ²`.
pub fn aaoi_derivative(lambda: f64, mu: f64) -> f64 {
    (mu - 1.0) / (mu * mu) + (1.0 - mu) / ((mu - lambda) * (mu - lambda)) - (lambda * lambda).recip()
}

pub fn latency_report(lambda: f64, mu: f64) -> Result<LatencyReport> {
    let queue_len = avg_queue_length(lambda, mu)?;
    let delay_tx = mu.recip();
    let delay_queue = queue_len / lambda;
    Ok(LatencyReport {
        queue_len,
        delay_tx,
        delay_queue,
        delay_total: delay_tx + delay_queue,
        aaoi: aaoi_unchecked(lambda, mu),
    })
}
