//! Arrival-rate choices that minimise the average age of information.
//!
//! Setting `∂AAoI/∂λ = 0` and clearing denominators gives the quartic
//!
//! ```text
//! (μ-1)λ⁴ + (2μ-2μ²)λ³ - μ²λ² + 2μ³λ - μ⁴ = 0
//! ```
//!
//! whose root in `(0, μ)` is the delay-tolerant optimum. The solver brackets
//! it by bisection on the derivative itself, cross-checks against every real
//! root of the quartic, and confirms the winner against a dense grid.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{domain, Error, Result};
use crate::latency::{aaoi_derivative, aaoi_unchecked, avg_delay};

/// Relative offset used for solutions sitting on the stability boundary.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Grid resolution of the minimiser cross-check.
const GRID_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Interior,
    DelayBound,
    /// The minimiser is the supremum `λ -> μ`; reported as `μ(1 - 1e-9)`
    /// and not strictly feasible for a queue simulation.
    StabilityBound,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Binding::Interior => "interior",
            Binding::DelayBound => "delay_bound",
            Binding::StabilityBound => "stability_bound",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub lambda_opt: f64,
    pub aaoi_opt: f64,
    pub delay_at_opt: f64,
    pub binding: Binding,
}

impl OptimizationResult {
    fn at(lambda: f64, mu: f64, binding: Binding) -> Result<Self> {
        Ok(Self {
            lambda_opt: lambda,
            aaoi_opt: aaoi_unchecked(lambda, mu),
            delay_at_opt: avg_delay(lambda, mu)?,
            binding,
        })
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("service rate must lie in (0, 1], got {mu}")))
    }
}

/// Quartic coefficients, highest degree first.
pub fn quartic_coefficients(mu: f64) -> [f64; 5] {
    let mu2 = mu * mu;
    [mu - 1.0, 2.0 * mu - 2.0 * mu2, -mu2, 2.0 * mu2 * mu, -mu2 * mu2]
}

/// Every real root of the optimality quartic, each with relative
/// back-substitution residual below `1e-9`.
pub fn quartic_roots(mu: f64) -> Result<Vec<f64>> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(domain(format!("quartic roots need 0 < mu < 1, got {mu}")));
    }
    let coeffs = quartic_coefficients(mu);
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let roots = real_polynomial_roots(&coeffs)
        .into_iter()
        .filter(|&x| horner(&coeffs, x).abs() / scale < 1e-9)
        .collect();
    Ok(roots)
}

/// Minimise AAoI over `0 < λ < μ`.
pub fn optimal_lambda_unconstrained(mu: f64) -> Result<OptimizationResult> {
    check_mu(mu)?;
    let lo = BOUNDARY_EPS;
    let hi = mu - BOUNDARY_EPS;
    if mu == 1.0 || hi <= lo || aaoi_derivative(hi, mu) <= 0.0 {
        // The quartic degenerates to -(λ-1)² at μ = 1: AAoI decreases all the
        // way to the stability boundary.
        return OptimizationResult::at(mu * (1.0 - BOUNDARY_EPS), mu, Binding::StabilityBound);
    }
    if aaoi_derivative(lo, mu) >= 0.0 {
        return Err(Error::Numerical(format!(
            "AAoI derivative is non-negative at lambda={lo} for mu={mu}; no interior minimiser bracketed"
        )));
    }
    let bisected = bisect(|l| aaoi_derivative(l, mu), lo, hi);

    // Grid-argmin tiebreak among all stationary points inside (0, μ).
    let mut best = bisected;
    if mu < 1.0 {
        for r in quartic_roots(mu)? {
            if r > 0.0 && r < mu && aaoi_unchecked(r, mu) < aaoi_unchecked(best, mu) {
                best = r;
            }
        }
    }

    let (grid_lambda, grid_value) = grid_argmin(mu);
    let value = aaoi_unchecked(best, mu);
    if value > grid_value + 1e-9 * grid_value.abs() {
        return Err(Error::Numerical(format!(
            "root lambda={best} (AAoI {value}) is beaten by grid point lambda={grid_lambda} (AAoI {grid_value}) for mu={mu}"
        )));
    }
    OptimizationResult::at(best, mu, Binding::Interior)
}

/// Largest `λ` with `D(λ) <= d_th`, or an infeasibility error.
pub fn delay_limited_lambda(mu: f64, d_th: f64) -> Result<f64> {
    check_mu(mu)?;
    if !(d_th > 0.0) {
        return Err(domain(format!("delay threshold must be > 0, got {d_th}")));
    }
    if mu == 1.0 {
        // D = 2 for every λ.
        return if d_th >= 2.0 {
            Ok(mu * (1.0 - BOUNDARY_EPS))
        } else {
            Err(Error::Infeasible(format!("delay threshold {d_th} is below the minimum delay 2")))
        };
    }
    if d_th.is_infinite() {
        return Ok(mu * (1.0 - BOUNDARY_EPS));
    }
    let min_delay = 2.0 / mu;
    if d_th <= min_delay {
        return Err(Error::Infeasible(format!(
            "delay threshold {d_th} does not exceed the minimum achievable delay 2/mu = {min_delay}"
        )));
    }
    // (1-λ)/(μ-λ) = c  with  c = d_th - 1/μ > 1
    let c = d_th - mu.recip();
    let mut lambda = (c * mu - 1.0) / (c - 1.0);
    while lambda > 0.0 && avg_delay(lambda, mu)? > d_th {
        lambda = lambda.next_down();
    }
    Ok(lambda)
}

/// Minimise AAoI over `{0 < λ < μ, D(λ) <= d_th}`.
pub fn optimal_lambda_delay_constrained(mu: f64, d_th: f64) -> Result<OptimizationResult> {
    let unconstrained = optimal_lambda_unconstrained(mu)?;
    if d_th.is_infinite() && d_th > 0.0 {
        return Ok(unconstrained);
    }
    let lambda_max = delay_limited_lambda(mu, d_th)?;
    debug_assert!(is_unimodal(mu, 2_000), "AAoI is not unimodal for mu={mu}");
    if unconstrained.lambda_opt <= lambda_max {
        Ok(unconstrained)
    } else {
        OptimizationResult::at(lambda_max, mu, Binding::DelayBound)
    }
}

/// Grid scan: exactly one local minimum of AAoI on `(0, μ)`.
pub fn is_unimodal(mu: f64, points: u32) -> bool {
    let vals: Vec<f64> = (1..points)
        .map(|k| aaoi_unchecked(mu * f64::from(k) / f64::from(points), mu))
        .collect();
    let interior_minima = vals.windows(3).filter(|w| w[1] < w[0] && w[1] <= w[2]).count();
    let boundary_min = vals.len() >= 2 && vals[vals.len() - 1] < vals[vals.len() - 2];
    interior_minima + usize::from(boundary_min) == 1
}

fn grid_argmin(mu: f64) -> (f64, f64) {
    let steps = (mu / GRID_STEP).ceil() as u32;
    (1..steps)
        .map(|k| {
            let l = mu * f64::from(k) / f64::from(steps);
            (l, aaoi_unchecked(l, mu))
        })
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Bisection on a function that is negative at `lo` and positive at `hi`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let deg = coeffs.len() - 1;
    coeffs[..deg].iter().enumerate().map(|(i, &c)| c * (deg - i) as f64).collect()
}

/// Real roots by recursive isolation between critical points.
fn real_polynomial_roots(coeffs: &[f64]) -> Vec<f64> {
    let first = coeffs.iter().position(|&c| c != 0.0);
    let coeffs = match first {
        Some(i) => &coeffs[i..],
        None => return Vec::new(),
    };
    match coeffs.len() {
        0 | 1 => return Vec::new(),
        2 => return vec![-coeffs[1] / coeffs[0]],
        _ => {}
    }
    let lead = coeffs[0];
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max((c / lead).abs()));
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));

    let mut knots = vec![-bound];
    let mut crit: Vec<f64> = real_polynomial_roots(&derivative(coeffs))
        .into_iter()
        .filter(|x| x.abs() < bound)
        .collect();
    crit.sort_by(|a, b| a.total_cmp(b));
    knots.extend(crit);
    knots.push(bound);

    let p = |x: f64| horner(coeffs, x);
    let mut roots: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (pa, pb) = (p(a), p(b));
        if pa == 0.0 {
            roots.push(a);
        } else if pa.signum() != pb.signum() && pb != 0.0 {
            let root = if pa < 0.0 { bisect(p, a, b) } else { bisect(|x| -p(x), a, b) };
            roots.push(root);
        }
    }
    if let Some(&last) = knots.last() {
        if p(last) == 0.0 {
            roots.push(last);
        }
    }
    // Even-multiplicity roots touch zero at a critical point without a sign change.
    for &c in &knots[1..knots.len() - 1] {
        if p(c).abs() <= 1e-12 * scale && !roots.iter().any(|r| (r - c).abs() < 1e-9) {
            roots.push(c);
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * a.abs().max(1.0));
    roots
}
