//! Steady state of the jammer's energy buffer.
//!
//! Each slot the jammer tosses a coin with bias `p_J`; a chunk of energy
//! arrives with probability `δ`. The buffer level is a birth-death chain
//! with up-rate `α = δ(1 - p_J)` and down-rate `ζ = (1 - δ)p_J`, so the
//! stationary distribution is geometric in `r = α/ζ`:
//! `π_i ∝ r^i`, truncated at `B` for a finite battery.
//!
//! Two flavours of `Pr(B = 0)` are exposed. [`empty_probability_case_split`]
//! follows the two-case closed form (zero whenever `p_J < δ`), while
//! [`empty_probability_exact`] solves the finite chain for every `r`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, ensure_probability, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Capacity {
    Infinite,
    Finite(u32),
}

impl Capacity {
    pub fn finite(b: u32) -> Result<Self> {
        if b == 0 {
            Err(domain("battery capacity must be >= 1"))
        } else {
            Ok(Capacity::Finite(b))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Capacity::Infinite)
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Infinite => f.write_str("inf"),
            Capacity::Finite(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for Capacity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "unlimited" => Ok(Capacity::Infinite),
            other => {
                let b: u32 = other
                    .parse()
                    .map_err(|_| domain(format!("battery capacity must be 'inf' or an integer >= 1, got '{s}'")))?;
                Capacity::finite(b)
            }
        }
    }
}

/// Jamming probability, energy arrival rate and battery size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JammerEnergyModel {
    pub p_jam: f64,
    pub delta: f64,
    pub capacity: Capacity,
}

impl JammerEnergyModel {
    pub fn new(p_jam: f64, delta: f64, capacity: Capacity) -> Result<Self> {
        ensure_probability("jamming probability", p_jam)?;
        ensure_probability("energy arrival rate", delta)?;
        if capacity == Capacity::Finite(0) {
            return Err(domain("battery capacity must be >= 1"));
        }
        Ok(Self { p_jam, delta, capacity })
    }

    /// Birth rate `α = δ(1 - p_J)`.
    pub fn alpha(&self) -> f64 {
        self.delta * (1.0 - self.p_jam)
    }

    /// Death rate `ζ = (1 - δ)p_J`.
    pub fn zeta(&self) -> f64 {
        (1.0 - self.delta) * self.p_jam
    }

    /// `α/ζ`; infinite when `ζ = 0 < α`, NaN when both vanish.
    pub fn ratio(&self) -> f64 {
        self.alpha() / self.zeta()
    }

    /// Whether the "`p_J >= δ`" branch applies.
    pub fn energy_limited(&self) -> bool {
        self.p_jam >= self.delta
    }
}

/// Which empty-buffer probability feeds the service rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BufferMode {
    /// Two-case closed form: `Pr(B=0) = 0` whenever `p_J < δ`.
    #[default]
    CaseSplit,
    /// Exact stationary solution of the chain.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferSteadyState {
    pub empty_prob: f64,
    pub nonempty_prob: f64,
    /// `π_0..π_B` for a finite battery.
    pub distribution: Option<Vec<f64>>,
}

/// Exact empty probability, flagged when the chain has no stationary law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmptyProbability {
    pub value: f64,
    /// False for an infinite battery with `α >= ζ`; `value` is then 0 by convention.
    pub stationary: bool,
}

/// `Pr(B = 0)` under the two-case closed form.
///
/// * `p_J < δ`: 0 for either battery.
/// * `p_J >= δ`, infinite battery: `1 - α/ζ`.
/// * `p_J >= δ`, finite battery `B`: `(1 - r)/(1 - r^(B+1))`, which equals
///   `(p_J - δ)ζ^B / (ζ^(B+1) - α^(B+1))` and tends to `1/(B+1)` at `r = 1`.
///
/// When `ζ = 0` on the second branch the chain is frozen: `p_J = δ = 0`
/// gives 1 (no energy ever arrives), `p_J = δ = 1` gives 0 (every slot's
/// chunk funds that slot's jam).
pub fn empty_probability_case_split(model: &JammerEnergyModel) -> f64 {
    if !model.energy_limited() {
        return 0.0;
    }
    let (alpha, zeta) = (model.alpha(), model.zeta());
    if zeta == 0.0 {
        return frozen_chain_empty(model);
    }
    let r = alpha / zeta;
    match model.capacity {
        Capacity::Infinite => (1.0 - r).max(0.0),
        Capacity::Finite(b) => truncated_geometric_empty(r, b),
    }
}

/// Exact stationary `Pr(B = 0)` for every `r`, including `r > 1`.
pub fn empty_probability_exact(model: &JammerEnergyModel) -> EmptyProbability {
    let (alpha, zeta) = (model.alpha(), model.zeta());
    if zeta == 0.0 && alpha == 0.0 {
        return EmptyProbability { value: frozen_chain_empty(model), stationary: true };
    }
    match model.capacity {
        Capacity::Infinite => {
            if alpha < zeta {
                EmptyProbability { value: 1.0 - alpha / zeta, stationary: true }
            } else {
                EmptyProbability { value: 0.0, stationary: false }
            }
        }
        Capacity::Finite(b) => {
            if zeta == 0.0 {
                // Only upward moves: all mass ends at B.
                EmptyProbability { value: 0.0, stationary: true }
            } else {
                EmptyProbability { value: truncated_geometric_empty(alpha / zeta, b), stationary: true }
            }
        }
    }
}

/// `π_0..π_B` of the finite chain; `π_i = π_0 r^i`.
pub fn steady_state_distribution(model: &JammerEnergyModel) -> Result<BufferSteadyState> {
    let b = match model.capacity {
        Capacity::Finite(b) => b as usize,
        Capacity::Infinite => {
            return Err(domain("the full distribution is only available for a finite battery"));
        }
    };
    let (alpha, zeta) = (model.alpha(), model.zeta());
    let mut weights = vec![0.0; b + 1];
    if alpha == 0.0 && zeta == 0.0 {
        let e = frozen_chain_empty(model);
        weights[0] = e;
        weights[b] += 1.0 - e;
    } else if zeta == 0.0 {
        weights[b] = 1.0;
    } else {
        let r = alpha / zeta;
        if r <= 1.0 {
            let mut w = 1.0;
            for slot in weights.iter_mut() {
                *slot = w;
                w *= r;
            }
        } else {
            // Weight relative to the top state to avoid overflow.
            let inv = r.recip();
            let mut w = 1.0;
            for slot in weights.iter_mut().rev() {
                *slot = w;
                w *= inv;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }
    let empty = weights[0];
    Ok(BufferSteadyState { empty_prob: empty, nonempty_prob: 1.0 - empty, distribution: Some(weights) })
}

/// Empty and non-empty probabilities under the chosen mode.
pub fn buffer_steady_state(model: &JammerEnergyModel, mode: BufferMode) -> BufferSteadyState {
    let empty = match mode {
        BufferMode::CaseSplit => empty_probability_case_split(model),
        BufferMode::Exact => empty_probability_exact(model).value,
    };
    BufferSteadyState { empty_prob: empty, nonempty_prob: 1.0 - empty, distribution: None }
}

/// `1 / Σ_{i=0}^{B} r^i`.
fn truncated_geometric_empty(r: f64, b: u32) -> f64 {
    let n = f64::from(b) + 1.0;
    if (r - 1.0).abs() < 1e-6 {
        // Direct sum near r = 1, where the closed form cancels.
        let mut sum = 0.0;
        let mut w = 1.0;
        for _ in 0..=b {
            sum += w;
            w *= r;
        }
        return 1.0 / sum;
    }
    if r < 1.0 {
        // (1 - r) / (1 - r^(B+1))
        (1.0 - r) / -(n * r.ln()).exp_m1()
    } else {
        // (r - 1) / (r^(B+1) - 1), computed as r^-B (1 - 1/r) / (1 - r^-(B+1))
        let inv = r.recip();
        let top = (f64::from(b) * inv.ln()).exp() * (1.0 - inv);
        top / -(n * inv.ln()).exp_m1()
    }
}

fn frozen_chain_empty(model: &JammerEnergyModel) -> f64 {
    if model.delta == 0.0 {
        1.0
    } else {
        0.0
    }
}
