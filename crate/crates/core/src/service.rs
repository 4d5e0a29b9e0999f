//! Average service rate of the transmit queue under an energy-harvesting jammer.

use serde::{Deserialize, Serialize};

use crate::energy::{buffer_steady_state, BufferMode, JammerEnergyModel};
use crate::error::{domain, Result};
use crate::outage::{outage_with_jamming, outage_without_jamming, AntennaConfig, LinkBudget};

/// Everything the service rate depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceContext {
    pub antenna: AntennaConfig,
    pub budget: LinkBudget,
    pub jammer: JammerEnergyModel,
}

/// Bernoulli packet arrivals with rate `λ ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    pub lambda: f64,
}

impl TrafficModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda > 0.0 && lambda < 1.0 {
            Ok(Self { lambda })
        } else {
            Err(domain(format!("arrival rate must lie in (0, 1), got {lambda}")))
        }
    }
}

/// Intermediate quantities behind a service rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceBreakdown {
    pub outage_no_jam: f64,
    pub outage_jam: f64,
    /// `Pr(B ≠ 0)`.
    pub buffer_nonempty: f64,
    /// Long-run fraction of jammed slots, `p_J · Pr(B ≠ 0)`.
    pub jam_probability: f64,
    pub mu: f64,
}

impl ServiceContext {
    pub fn new(antenna: AntennaConfig, budget: LinkBudget, jammer: JammerEnergyModel) -> Self {
        Self { antenna, budget, jammer }
    }

    /// `(p_out without jamming, p_out with jamming)`.
    pub fn outage_pair(&self) -> Result<(f64, f64)> {
        let no_jam = outage_without_jamming(&self.antenna, self.budget.power_tx, self.budget.target_rate)?;
        let jam = outage_with_jamming(&self.antenna, &self.budget)?;
        Ok((no_jam, jam))
    }

    pub fn breakdown(&self, mode: BufferMode) -> Result<ServiceBreakdown> {
        let (outage_no_jam, outage_jam) = self.outage_pair()?;
        let buffer_nonempty = buffer_steady_state(&self.jammer, mode).nonempty_prob;
        let jam_probability = self.jammer.p_jam * buffer_nonempty;
        // Same mix as the documented formula, arranged so that rounding keeps
        // μ monotone in the jam probability.
        let mu = (1.0 - outage_no_jam) - jam_probability * (outage_jam - outage_no_jam);
        Ok(ServiceBreakdown { outage_no_jam, outage_jam, buffer_nonempty, jam_probability, mu })
    }
}

/// `μ = (1 - p_J Pr(B≠0))(1 - p_out^WoJ) + p_J Pr(B≠0)(1 - p_out^J)`, with
/// `Pr(B≠0)` from the two-case closed form for the context's battery.
pub fn average_service_rate(ctx: &ServiceContext) -> Result<f64> {
    Ok(ctx.breakdown(BufferMode::CaseSplit)?.mu)
}

/// As [`average_service_rate`] but with a selectable buffer model.
pub fn average_service_rate_with(ctx: &ServiceContext, mode: BufferMode) -> Result<f64> {
    Ok(ctx.breakdown(mode)?.mu)
}

/// Strict `λ < μ`.
pub fn is_stable(ctx: &ServiceContext, traffic: &TrafficModel) -> Result<bool> {
    Ok(traffic.lambda < average_service_rate(ctx)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::Capacity;

    fn ctx(antenna: AntennaConfig, p: f64, pj: f64, p_jam: f64, delta: f64, cap: Capacity) -> ServiceContext {
        ServiceContext::new(
            antenna,
            LinkBudget::new(p, pj, 1.0).unwrap(),
            JammerEnergyModel::new(p_jam, delta, cap).unwrap(),
        )
    }

    fn antennas() -> Vec<AntennaConfig> {
        vec![
            AntennaConfig::miso(2).unwrap(),
            AntennaConfig::simo(2).unwrap(),
            AntennaConfig::alamouti(2, 2).unwrap(),
        ]
    }

    #[test]
    fn inert_jammer() {
        for a in antennas() {
            let c = ctx(a, 100.0, 100.0, 0.0, 0.6, Capacity::Infinite);
            let (no_jam, _) = c.outage_pair().unwrap();
            assert!((average_service_rate(&c).unwrap() - (1.0 - no_jam)).abs() < 1e-15);
        }
    }

    #[test]
    fn always_jamming() {
        for a in antennas() {
            for cap in [Capacity::Infinite, Capacity::Finite(3)] {
                let c = ctx(a, 100.0, 100.0, 1.0, 1.0, cap);
                let (_, jam) = c.outage_pair().unwrap();
                assert!((average_service_rate(&c).unwrap() - (1.0 - jam)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn infinite_battery_form() {
        // Case p_J >= δ written with (1-p_J)δ/(1-δ) as the jam weight.
        for a in antennas() {
            let c = ctx(a, 100.0, 100.0, 0.7, 0.6, Capacity::Infinite);
            let (no_jam, jam) = c.outage_pair().unwrap();
            let w = 0.3 * 0.6 / 0.4;
            let literal = (1.0 - w) * (1.0 - no_jam) + w * (1.0 - jam);
            assert!((average_service_rate(&c).unwrap() - literal).abs() < 1e-14);
        }
    }

    #[test]
    fn battery_cases_coincide_below_delta() {
        for a in antennas() {
            for &p_jam in &[0.0, 0.1, 0.3, 0.59] {
                let inf = average_service_rate(&ctx(a, 100.0, 50.0, p_jam, 0.6, Capacity::Infinite)).unwrap();
                for b in [1, 2, 10] {
                    let fin = average_service_rate(&ctx(a, 100.0, 50.0, p_jam, 0.6, Capacity::Finite(b))).unwrap();
                    assert_eq!(inf, fin);
                }
            }
        }
    }

    #[test]
    fn continuous_at_p_equals_delta() {
        for a in antennas() {
            for &d in &[0.2, 0.6, 0.9] {
                let c = ctx(a, 100.0, 100.0, d, d, Capacity::Infinite);
                let (no_jam, jam) = c.outage_pair().unwrap();
                let below = (1.0 - d) * (1.0 - no_jam) + d * (1.0 - jam);
                assert!((average_service_rate(&c).unwrap() - below).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convex_combination_bounds() {
        for a in antennas() {
            for &(pj, pr, d) in &[(1.0, 0.2, 0.4), (100.0, 0.7, 0.6), (1e4, 0.9, 0.1)] {
                for cap in [Capacity::Infinite, Capacity::Finite(2)] {
                    let c = ctx(a, 30.0, pj, pr, d, cap);
                    let (no_jam, jam) = c.outage_pair().unwrap();
                    let mu = average_service_rate(&c).unwrap();
                    let (lo, hi) = ((1.0 - no_jam).min(1.0 - jam), (1.0 - no_jam).max(1.0 - jam));
                    assert!(mu >= lo - 1e-15 && mu <= hi + 1e-15);
                }
            }
        }
    }

    #[test]
    fn jammer_resources_never_help_the_link() {
        for a in antennas() {
            for cap in [Capacity::Infinite, Capacity::Finite(2)] {
                let mut prev = f64::INFINITY;
                for i in 0..=60 {
                    let pj = 10f64.powf(-1.0 + f64::from(i) / 10.0);
                    let mu = average_service_rate(&ctx(a, 100.0, pj, 0.7, 0.6, cap)).unwrap();
                    assert!(mu <= prev + 1e-15);
                    prev = mu;
                }
                let mut prev = f64::INFINITY;
                for i in 0..=100 {
                    let d = f64::from(i) / 100.0;
                    let mu = average_service_rate(&ctx(a, 100.0, 100.0, 0.7, d, cap)).unwrap();
                    assert!(mu <= prev + 1e-15, "delta={d}");
                    prev = mu;
                }
                let mut prev = 0.0;
                for i in 0..=60 {
                    let p = 10f64.powf(f64::from(i) / 20.0);
                    let mu = average_service_rate(&ctx(a, p, 100.0, 0.7, 0.6, cap)).unwrap();
                    assert!(mu >= prev - 1e-15);
                    prev = mu;
                }
            }
            let mut prev = f64::INFINITY;
            for b in 1..=50 {
                let mu = average_service_rate(&ctx(a, 100.0, 100.0, 0.7, 0.6, Capacity::Finite(b))).unwrap();
                assert!(mu <= prev);
                prev = mu;
            }
            let inf = average_service_rate(&ctx(a, 100.0, 100.0, 0.7, 0.6, Capacity::Infinite)).unwrap();
            assert!(prev >= inf);
        }
    }

    #[test]
    fn jam_probability_is_unimodal_in_p_jam() {
        // Below δ the jammer always has energy and μ falls with p_J; above δ
        // the energy limit bites and the jammed fraction (1-p_J)δ/(1-δ) shrinks.
        for a in antennas() {
            let mu = |p: f64| average_service_rate(&ctx(a, 100.0, 100.0, p, 0.6, Capacity::Infinite)).unwrap();
            let mut prev = f64::INFINITY;
            for i in 0..=60 {
                let v = mu(f64::from(i) / 100.0);
                assert!(v <= prev + 1e-15);
                prev = v;
            }
            for i in 60..=100 {
                let v = mu(f64::from(i) / 100.0);
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn stability_predicate() {
        let c = ctx(AntennaConfig::simo(2).unwrap(), 100.0, 100.0, 0.7, 0.6, Capacity::Infinite);
        let mu = average_service_rate(&c).unwrap();
        assert!(mu <= 0.999);
        assert!(!is_stable(&c, &TrafficModel::new(0.999).unwrap()).unwrap());
        assert!(is_stable(&c, &TrafficModel::new(1e-9).unwrap()).unwrap());
        // Strict inequality at the boundary.
        assert!(!is_stable(&c, &TrafficModel { lambda: mu }).unwrap());
        assert!(TrafficModel::new(0.0).is_err());
        assert!(TrafficModel::new(1.0).is_err());
    }
}
