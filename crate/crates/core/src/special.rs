//! Incomplete gamma quantities for integer shape.
//!
//! Every outage expression in this crate is built from `Γ(n, x)` with an
//! integer shape `n` (an antenna count or a product of two). For integer
//! shape the upper incomplete gamma function has the exact finite form
//!
//! ```text
//! Γ(n, x) = (n-1)! · e^(-x) · Σ_{k=0}^{n-1} x^k / k!
//! ```
//!
//! so no continued fractions or general-purpose special-function library is
//! needed. The only numerical hazard is the `e^(1/P_J)` prefactor in the
//! jamming term, which overflows for weak jammers; [`shifted_exp_gamma_ratio`]
//! cancels it analytically and falls back to log-space accumulation.

use crate::error::{domain, Result};

/// Largest shape accepted by default.
pub const DEFAULT_MAX_SHAPE: u32 = 64;

/// Log-magnitude above which term accumulation switches to log-sum-exp.
const LOG_SWITCH: f64 = 300.0;

/// Validated `(shape, point)` pair for the integer-shape gamma functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaArgs {
    shape: u32,
    point: f64,
}

impl GammaArgs {
    /// Validates against [`DEFAULT_MAX_SHAPE`].
    pub fn new(shape: u32, point: f64) -> Result<Self> {
        Self::with_max_shape(shape, point, DEFAULT_MAX_SHAPE)
    }

    pub fn with_max_shape(shape: u32, point: f64, max_shape: u32) -> Result<Self> {
        if shape == 0 {
            return Err(domain("gamma shape must be a positive integer, got 0"));
        }
        if shape > max_shape {
            return Err(domain(format!(
                "gamma shape {shape} exceeds the configured maximum {max_shape}"
            )));
        }
        if !(point >= 0.0) || point.is_infinite() {
            return Err(domain(format!("gamma point must be finite and >= 0, got {point}")));
        }
        Ok(Self { shape, point })
    }

    /// Accepts a real-valued shape, rejecting anything that is not a positive integer.
    pub fn from_real(shape: f64, point: f64) -> Result<Self> {
        if !(shape >= 1.0) || shape.fract() != 0.0 || shape > u32::MAX as f64 {
            return Err(domain(format!("gamma shape must be a positive integer, got {shape}")));
        }
        Self::new(shape as u32, point)
    }

    pub fn shape(&self) -> u32 {
        self.shape
    }

    pub fn point(&self) -> f64 {
        self.point
    }

    /// `Γ(n, x)`.
    pub fn upper(&self) -> f64 {
        factorial(self.shape - 1) * self.regularized_upper()
    }

    /// `Q(n, x) = Γ(n, x) / Γ(n)`.
    pub fn regularized_upper(&self) -> f64 {
        let (n, x) = (self.shape, self.point);
        if x == 0.0 {
            return 1.0;
        }
        if x < f64::from(n) {
            return 1.0 - lower_tail(n, x);
        }
        (-x + ln_exp_partial_sum(n, x)).exp().min(1.0)
    }

    /// `P(n, x) = 1 - Q(n, x)`, computed without cancellation for small `x`.
    pub fn regularized_lower(&self) -> f64 {
        let (n, x) = (self.shape, self.point);
        if x == 0.0 {
            return 0.0;
        }
        if x >= f64::from(n) {
            return (1.0 - self.regularized_upper()).max(0.0);
        }
        lower_tail(n, x)
    }
}

/// `Γ(n, x)` for integer `n >= 1` and `x >= 0`.
pub fn upper_incomplete_gamma_int(n: u32, x: f64) -> Result<f64> {
    Ok(GammaArgs::new(n, x)?.upper())
}

/// `Γ(n, x) / Γ(n)`, the probability that a `Gamma(n, 1)` variate exceeds `x`.
pub fn regularized_upper_gamma(n: u32, x: f64) -> Result<f64> {
    Ok(GammaArgs::new(n, x)?.regularized_upper())
}

/// `1 - Γ(n, x) / Γ(n)`, the `Gamma(n, 1)` CDF at `x`.
pub fn regularized_lower_gamma(n: u32, x: f64) -> Result<f64> {
    Ok(GammaArgs::new(n, x)?.regularized_lower())
}

/// `e^(s) · Γ(n, a + s) / (Γ(n) · (1 + c·s)^n)` with `s = inv_pj`.
///
/// The `e^(s)` factor cancels against the `e^(-a-s)` inside the finite
/// series, leaving `e^(-a) · Σ_k (a+s)^k/k! / (1 + c·s)^n`. The value stays
/// finite for any `s`, including the weak-jammer limit `s -> ∞` where it
/// tends to zero.
pub fn shifted_exp_gamma_ratio(n: u32, a: f64, inv_pj: f64, c: f64) -> Result<f64> {
    GammaArgs::new(n, a)?;
    if !(inv_pj > 0.0) || !inv_pj.is_finite() {
        return Err(domain(format!("inv_pj must be finite and > 0, got {inv_pj}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain(format!("c must be finite and > 0, got {c}")));
    }
    let y = a + inv_pj;
    let ln_sum = ln_exp_partial_sum(n, y);
    let ln_denominator = f64::from(n) * (c * inv_pj).ln_1p();
    let value = if ln_sum <= LOG_SWITCH && ln_denominator <= LOG_SWITCH {
        (-a).exp() * ln_sum.exp() / ln_denominator.exp()
    } else {
        (-a + ln_sum - ln_denominator).exp()
    };
    Ok(value)
}

/// `e^(-x) Σ_{k>=n} x^k/k!` for `0 < x < n`: leading term times a
/// fast-converging ratio series.
fn lower_tail(n: u32, x: f64) -> f64 {
    let ln_lead = f64::from(n) * x.ln() - ln_factorial(n);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = f64::from(n);
    loop {
        k += 1.0;
        term *= x / k;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    (-x + ln_lead + sum.ln()).exp().min(1.0)
}

/// `ln Σ_{k=0}^{n-1} x^k / k!` for `x >= 0`.
fn ln_exp_partial_sum(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // The largest term sits at k = min(n-1, floor(x)).
    let k_peak = (n - 1).min(x.floor().min(f64::from(u32::MAX)) as u32);
    let ln_peak = f64::from(k_peak) * x.ln() - ln_factorial(k_peak);
    if ln_peak <= LOG_SWITCH {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..n {
            term *= x / f64::from(k);
            sum += term;
        }
        sum.ln()
    } else {
        let ln_x = x.ln();
        let mut ln_k_fact = 0.0;
        let mut acc = 0.0;
        for k in 0..n {
            if k > 0 {
                ln_k_fact += f64::from(k).ln();
            }
            acc += (f64::from(k) * ln_x - ln_k_fact - ln_peak).exp();
        }
        ln_peak + acc.ln()
    }
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|j| f64::from(j).ln()).sum()
}

fn factorial(k: u32) -> f64 {
    (2..=k).map(f64::from).product()
}
