//! Closed-form outage probabilities for MISO, SIMO and Alamouti-coded MIMO
//! links under Rayleigh fading, with and without a single-antenna jammer.
//!
//! All three antenna schemes share one structure. The effective channel gain
//! is `Gamma(n, 1)` distributed with diversity order `n`, and the
//! per-unit-gain signal power is `s = P·share`. Outage then splits into a
//! no-jamming term and a jamming correction:
//!
//! ```text
//! p_out = 1 - Q(n, g/s) + e^(1/P_J) Γ(n, g/s + 1/P_J) / (Γ(n) (1 + s/(g P_J))^n)
//! ```
//!
//! with `g = 2^R - 1`. All powers are linear and noise has unit variance.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, ensure_positive, Error, Result};
use crate::special::{regularized_lower_gamma, shifted_exp_gamma_ratio};

/// Rate `K/T` of the Alamouti block code. Fixed at one.
pub const STBC_RATE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// `n_t` transmit antennas, one receive antenna, equal power split.
    Miso,
    /// One transmit antenna, `n_r` receive antennas.
    Simo,
    /// Alamouti space-time block code over an `n_r x n_t` channel.
    Alamouti,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Miso => "miso",
            Scheme::Simo => "simo",
            Scheme::Alamouti => "alamouti",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "miso" => Ok(Scheme::Miso),
            "simo" => Ok(Scheme::Simo),
            "alamouti" | "mimo" => Ok(Scheme::Alamouti),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Antenna scheme together with its transmit and receive antenna counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntennaConfig {
    scheme: Scheme,
    n_t: u32,
    n_r: u32,
}

impl AntennaConfig {
    pub fn new(scheme: Scheme, n_t: u32, n_r: u32) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::Config(format!(
                "antenna counts must be >= 1, got n_t={n_t} n_r={n_r}"
            )));
        }
        match scheme {
            Scheme::Miso if n_r != 1 => Err(Error::Config(format!("MISO requires n_r = 1, got {n_r}"))),
            Scheme::Simo if n_t != 1 => Err(Error::Config(format!("SIMO requires n_t = 1, got {n_t}"))),
            _ => Ok(Self { scheme, n_t, n_r }),
        }
    }

    pub fn miso(n_t: u32) -> Result<Self> {
        Self::new(Scheme::Miso, n_t, 1)
    }

    pub fn simo(n_r: u32) -> Result<Self> {
        Self::new(Scheme::Simo, 1, n_r)
    }

    pub fn alamouti(n_t: u32, n_r: u32) -> Result<Self> {
        Self::new(Scheme::Alamouti, n_t, n_r)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n_t(&self) -> u32 {
        self.n_t
    }

    pub fn n_r(&self) -> u32 {
        self.n_r
    }

    /// Shape of the effective channel gain: `n_t`, `n_r`, or `N = n_t·n_r`.
    pub fn diversity(&self) -> u32 {
        match self.scheme {
            Scheme::Miso => self.n_t,
            Scheme::Simo => self.n_r,
            Scheme::Alamouti => self.n_t * self.n_r,
        }
    }

    /// Fraction of the transmit power carried per unit channel gain.
    pub fn power_share(&self) -> f64 {
        match self.scheme {
            Scheme::Miso | Scheme::Alamouti => 1.0 / f64::from(self.n_t),
            Scheme::Simo => 1.0,
        }
    }
}

/// Transmit power, jamming power (both linear) and target rate in bits per
/// channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub power_tx: f64,
    /// Zero means the jammer is silent.
    pub power_jam: f64,
    pub target_rate: f64,
}

impl LinkBudget {
    pub fn new(power_tx: f64, power_jam: f64, target_rate: f64) -> Result<Self> {
        ensure_positive("transmit power", power_tx)?;
        ensure_positive("target rate", target_rate)?;
        if !(power_jam >= 0.0) || !power_jam.is_finite() {
            return Err(domain(format!("jamming power must be finite and >= 0, got {power_jam}")));
        }
        Ok(Self { power_tx, power_jam, target_rate })
    }

    /// Decoding threshold `2^R - 1`.
    pub fn threshold(&self) -> f64 {
        decoding_threshold(self.target_rate)
    }

    /// Per-antenna power `β = P / n_t` used by the Alamouti scheme.
    pub fn beta(&self, config: &AntennaConfig) -> f64 {
        self.power_tx / f64::from(config.n_t())
    }

    pub fn with_power_jam(self, power_jam: f64) -> Result<Self> {
        Self::new(self.power_tx, power_jam, self.target_rate)
    }
}

/// `2^R - 1`, accurate for small `R`.
pub fn decoding_threshold(rate: f64) -> f64 {
    (rate * std::f64::consts::LN_2).exp_m1()
}

/// Ratio `η = P_J / P` held fixed in the high-power limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRatio(f64);

impl PowerRatio {
    /// `η` must be at least one; `+∞` is accepted.
    pub fn new(eta: f64) -> Result<Self> {
        if eta >= 1.0 {
            Ok(Self(eta))
        } else {
            Err(domain(format!("power ratio eta must be >= 1, got {eta}")))
        }
    }

    pub fn from_powers(power_tx: f64, power_jam: f64) -> Result<Self> {
        ensure_positive("transmit power", power_tx)?;
        Self::new(power_jam / power_tx)
    }

    pub fn eta(&self) -> f64 {
        self.0
    }
}

/// Outage probability with the jammer active at power `budget.power_jam`.
///
/// A silent jammer (`P_J = 0`) routes to [`outage_without_jamming`], since
/// the jamming correction is singular there.
pub fn outage_with_jamming(config: &AntennaConfig, budget: &LinkBudget) -> Result<f64> {
    if budget.power_jam == 0.0 {
        return outage_without_jamming(config, budget.power_tx, budget.target_rate);
    }
    let n = config.diversity();
    let signal = budget.power_tx * config.power_share();
    let g = budget.threshold();
    let a = g / signal;
    let base = regularized_lower_gamma(n, a)?;
    let inv_pj = budget.power_jam.recip();
    let c = signal / g;
    let jam = if inv_pj.is_finite() && c.is_finite() {
        shifted_exp_gamma_ratio(n, a, inv_pj, c)?
    } else {
        0.0
    };
    Ok((base + jam).min(1.0))
}

/// Outage probability of the unjammed link, `1 - Q(n, g/s)`.
pub fn outage_without_jamming(config: &AntennaConfig, power_tx: f64, target_rate: f64) -> Result<f64> {
    ensure_positive("transmit power", power_tx)?;
    ensure_positive("target rate", target_rate)?;
    let signal = power_tx * config.power_share();
    regularized_lower_gamma(config.diversity(), decoding_threshold(target_rate) / signal)
}

/// Limit of [`outage_with_jamming`] as `P, P_J -> ∞` with `P_J/P = η`:
/// `(1 + share/(η g))^(-n)`.
pub fn asymptotic_outage(config: &AntennaConfig, ratio: PowerRatio, target_rate: f64) -> Result<f64> {
    ensure_positive("target rate", target_rate)?;
    let g = decoding_threshold(target_rate);
    let x = config.power_share() / (ratio.eta() * g);
    Ok((-f64::from(config.diversity()) * x.ln_1p()).exp())
}
