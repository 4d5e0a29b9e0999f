//! Stability region of a two-user SIMO broadcast channel whose receivers are
//! both exposed to the jammer.
//!
//! The transmitter keeps one queue per user. When only queue `i` is
//! backlogged it sends at power `P_i` alone; when both are backlogged the
//! other user's signal is treated as noise, which leaves the same outage
//! structure with effective power `P_i - γ_i P_j`. The jammer is assumed to
//! have an unlimited battery with `δ > p_J`, so a slot is jammed with
//! probability `p_J`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

use crate::error::{domain, ensure_positive, ensure_probability, Error, Result};
use crate::special::{regularized_upper_gamma, shifted_exp_gamma_ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum User {
    One,
    Two,
}

impl User {
    fn idx(self) -> usize {
        match self {
            User::One => 0,
            User::Two => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            User::One => User::Two,
            User::Two => User::One,
        }
    }
}

impl fmt::Display for User {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.idx() + 1)
    }
}

/// Broadcast-channel parameters. Thresholds relate to target rates through
/// `γ_i = 2^(R_i) - 1`; all powers are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroadcastConfig {
    pub n_r: u32,
    pub power: [f64; 2],
    pub thresholds: [f64; 2],
    pub power_jam: f64,
    pub p_jam: f64,
}

impl BroadcastConfig {
    pub fn new(n_r: u32, power: [f64; 2], thresholds: [f64; 2], power_jam: f64, p_jam: f64) -> Result<Self> {
        if n_r == 0 {
            return Err(Error::Config("n_r must be at least 1".into()));
        }
        for (i, (&p, &g)) in power.iter().zip(&thresholds).enumerate() {
            ensure_positive(&format!("P_{}", i + 1), p)?;
            ensure_positive(&format!("gamma_{}", i + 1), g)?;
        }
        if !(power_jam >= 0.0) {
            return Err(domain(format!("jamming power must be >= 0, got {power_jam}")));
        }
        ensure_probability("p_J", p_jam)?;
        Ok(Self { n_r, power, thresholds, power_jam, p_jam })
    }

    /// `P_i - γ_i P_j`, the power left for user `i` when both queues transmit.
    pub fn effective_power(&self, user: User) -> f64 {
        let i = user.idx();
        self.power[i] - self.thresholds[i] * self.power[1 - i]
    }
}

/// Probability that a `Gamma(n_r, 1)` gain clears `γ(1 + P_J W)/p`, with the
/// jamming term active in a fraction `p_J` of slots.
fn success(cfg: &BroadcastConfig, power: f64, gamma: f64) -> Result<f64> {
    if power <= 0.0 {
        return Ok(0.0);
    }
    let a = gamma / power;
    let clear = regularized_upper_gamma(cfg.n_r, a)?;
    if cfg.p_jam == 0.0 || cfg.power_jam == 0.0 {
        return Ok(clear);
    }
    let inv_pj = cfg.power_jam.recip();
    let c = power / gamma;
    let jam = if inv_pj.is_finite() && c.is_finite() {
        shifted_exp_gamma_ratio(cfg.n_r, a, inv_pj, c)?
    } else {
        0.0
    };
    Ok((clear - cfg.p_jam * jam).clamp(0.0, 1.0))
}

/// `Pr(D_{i/i})`: user `i` decodes while only its own queue is served.
pub fn success_prob_single(user: User, cfg: &BroadcastConfig) -> Result<f64> {
    let i = user.idx();
    success(cfg, cfg.power[i], cfg.thresholds[i])
}

/// `Pr(D_{i/1,2})`: user `i` decodes while both queues are served. Zero when
/// the effective power `P_i - γ_i P_j` is not positive.
pub fn success_prob_both(user: User, cfg: &BroadcastConfig) -> Result<f64> {
    success(cfg, cfg.effective_power(user), cfg.thresholds[user.idx()])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbabilities {
    /// `[Pr(D_{1/1}), Pr(D_{2/2})]`.
    pub single: [f64; 2],
    /// `[Pr(D_{1/1,2}), Pr(D_{2/1,2})]`.
    pub both: [f64; 2],
}

impl SuccessProbabilities {
    pub fn compute(cfg: &BroadcastConfig) -> Result<Self> {
        Ok(Self {
            single: [success_prob_single(User::One, cfg)?, success_prob_single(User::Two, cfg)?],
            both: [success_prob_both(User::One, cfg)?, success_prob_both(User::Two, cfg)?],
        })
    }
}

/// One dominant system: user `favored` sees `λ_f < intercept - slope·λ_o`
/// and the other user is capped at `λ_o < cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominantRegion {
    pub favored: User,
    /// `Pr(D_{f/f})`.
    pub intercept: f64,
    /// `(Pr(D_{f/f}) - Pr(D_{f/1,2})) / Pr(D_{o/1,2})`; zero when degenerate.
    pub slope: f64,
    /// `Pr(D_{o/1,2})`.
    pub cap: f64,
    /// Set when a success probability is zero and the region collapses to
    /// (part of) an axis.
    pub degenerate: bool,
}

impl DominantRegion {
    fn build(favored: User, probs: &SuccessProbabilities) -> Self {
        let f = favored.idx();
        let intercept = probs.single[f];
        let cap = probs.both[1 - f];
        let degenerate = intercept == 0.0 || cap == 0.0;
        let slope = if cap > 0.0 { (intercept - probs.both[f]) / cap } else { 0.0 };
        Self { favored, intercept, slope, cap, degenerate }
    }

    /// Membership with strict inequalities; an idle queue is always stable.
    pub fn contains(&self, lambda: [f64; 2]) -> bool {
        let x = lambda[self.favored.idx()];
        let y = lambda[self.favored.other().idx()];
        if x < 0.0 || y < 0.0 {
            return false;
        }
        (y == 0.0 || y < self.cap) && (x == 0.0 || x < self.intercept - self.slope * y)
    }

    /// Corner points in `(λ_1, λ_2)` order, counter-clockwise from the origin.
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        let corner_x = self.intercept - self.slope * self.cap;
        let pts = [[0.0, 0.0], [self.intercept, 0.0], [corner_x, self.cap], [0.0, self.cap]];
        let mut out: Vec<[f64; 2]> = pts
            .iter()
            .map(|&[x, y]| match self.favored {
                User::One => [x, y],
                User::Two => [y, x],
            })
            .collect();
        if self.favored == User::Two {
            out.reverse();
            out.rotate_right(1);
        }
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRegion {
    pub probabilities: SuccessProbabilities,
    /// User 1 dominant.
    pub region_1: DominantRegion,
    /// User 2 dominant.
    pub region_2: DominantRegion,
}

impl StabilityRegion {
    pub fn contains(&self, lambda_1: f64, lambda_2: f64) -> bool {
        let l = [lambda_1, lambda_2];
        self.region_1.contains(l) || self.region_2.contains(l)
    }

    pub fn degenerate(&self) -> bool {
        self.region_1.degenerate || self.region_2.degenerate
    }

    /// Boundary of the union, counter-clockwise from the origin.
    pub fn union_vertices(&self) -> Vec<[f64; 2]> {
        let p = &self.probabilities;
        let mut out = vec![[0.0, 0.0], [p.single[0], 0.0], [p.both[0], p.both[1]], [0.0, p.single[1]]];
        out.dedup();
        out
    }

    /// CSV rows `region,index,lambda_1,lambda_2` for R1, R2 and the union.
    pub fn write_vertices_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Numerical(format!("csv output failed: {e}"));
        wtr.write_record(["region", "index", "lambda_1", "lambda_2"]).map_err(io)?;
        let sets = [
            ("R1", self.region_1.vertices()),
            ("R2", self.region_2.vertices()),
            ("union", self.union_vertices()),
        ];
        for (name, pts) in &sets {
            for (k, [x, y]) in pts.iter().enumerate() {
                wtr.write_record([name.to_string(), k.to_string(), x.to_string(), y.to_string()])
                    .map_err(io)?;
            }
        }
        wtr.flush().map_err(|e| Error::Numerical(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

pub fn stability_region(cfg: &BroadcastConfig) -> Result<StabilityRegion> {
    let probabilities = SuccessProbabilities::compute(cfg)?;
    Ok(StabilityRegion {
        probabilities,
        region_1: DominantRegion::build(User::One, &probabilities),
        region_2: DominantRegion::build(User::Two, &probabilities),
    })
}

/// Membership of `(λ_1, λ_2)` in `R1 ∪ R2`.
pub fn is_stable_pair(lambda_1: f64, lambda_2: f64, cfg: &BroadcastConfig) -> Result<bool> {
    if !(lambda_1 >= 0.0 && lambda_2 >= 0.0) {
        return Err(domain(format!("arrival rates must be >= 0, got ({lambda_1}, {lambda_2})")));
    }
    Ok(stability_region(cfg)?.contains(lambda_1, lambda_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_point(n_r: u32) -> BroadcastConfig {
        BroadcastConfig::new(n_r, [10.0, 10.0], [0.7, 0.5], 100.0, 0.6).unwrap()
    }

    /// `Pr(G >= x)` for `G ~ Gamma(n, 1)` from the Poisson tail.
    fn tail(n: u32, x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..n {
            term *= x / f64::from(k);
            sum += term;
        }
        (-x).exp() * sum
    }

    /// Average the conditional success over the jammer gain by composite
    /// Simpson, with a fine panel on the decay scale `1/(a P_J)` and a coarse
    /// one out to `w = 60`.
    fn quadrature_success(n: u32, power: f64, gamma: f64, pj: f64, p_jam: f64) -> f64 {
        if power <= 0.0 {
            return 0.0;
        }
        let a = gamma / power;
        let f = |w: f64| tail(n, a * (1.0 + pj * w)) * (-w).exp();
        let simpson = |lo: f64, hi: f64| {
            let m = 20_000;
            let h = (hi - lo) / f64::from(m);
            let mut s = f(lo) + f(hi);
            for k in 1..m {
                s += f(lo + h * f64::from(k)) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let split = (80.0 / (a * pj)).min(60.0);
        let jammed = simpson(0.0, split) + if split < 60.0 { simpson(split, 60.0) } else { 0.0 };
        (1.0 - p_jam) * tail(n, a) + p_jam * jammed
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let cases = [
            (2, [10.0, 10.0], [0.5, 0.5], 100.0, 0.6),
            (4, [10.0, 10.0], [0.7, 0.5], 100.0, 0.6),
            (1, [3.0, 20.0], [0.2, 1.5], 5.0, 0.3),
            (3, [50.0, 4.0], [0.05, 2.0], 1000.0, 0.9),
        ];
        for &(n, p, g, pj, pr) in &cases {
            let cfg = BroadcastConfig::new(n, p, g, pj, pr).unwrap();
            for user in [User::One, User::Two] {
                let i = user.idx();
                let single = success_prob_single(user, &cfg).unwrap();
                let oracle = quadrature_success(n, p[i], g[i], pj, pr);
                assert!((single - oracle).abs() < 1e-9, "{cfg:?} {user}: {single} vs {oracle}");
                let both = success_prob_both(user, &cfg).unwrap();
                let oracle = quadrature_success(n, p[i] - g[i] * p[1 - i], g[i], pj, pr);
                assert!((both - oracle).abs() < 1e-9, "{cfg:?} {user}: {both} vs {oracle}");
            }
        }
    }

    #[test]
    fn trivial_limits() {
        let quiet = BroadcastConfig::new(2, [10.0, 10.0], [0.5, 0.5], 100.0, 0.0).unwrap();
        let v = success_prob_single(User::One, &quiet).unwrap();
        assert!((v - tail(2, 0.05)).abs() < 1e-15);
        let hopeless = BroadcastConfig::new(2, [10.0, 10.0], [1e6, 0.5], 100.0, 0.6).unwrap();
        assert!(success_prob_single(User::One, &hopeless).unwrap() < 1e-300);
        // 10 - 2·10 < 0.
        let blocked = BroadcastConfig::new(2, [10.0, 10.0], [2.0, 0.5], 100.0, 0.6).unwrap();
        assert_eq!(success_prob_both(User::One, &blocked).unwrap(), 0.0);
        let tiny = BroadcastConfig::new(2, [10.0, 1e-12], [0.5, 0.5], 100.0, 0.6).unwrap();
        let a = success_prob_single(User::One, &tiny).unwrap();
        let b = success_prob_both(User::One, &tiny).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn relabeling_symmetry() {
        let a = BroadcastConfig::new(3, [8.0, 12.0], [0.4, 0.3], 50.0, 0.5).unwrap();
        let b = BroadcastConfig::new(3, [12.0, 8.0], [0.3, 0.4], 50.0, 0.5).unwrap();
        assert_eq!(success_prob_both(User::Two, &a).unwrap(), success_prob_both(User::One, &b).unwrap());
        assert_eq!(success_prob_single(User::Two, &a).unwrap(), success_prob_single(User::One, &b).unwrap());
    }

    #[test]
    fn probabilities_ordered() {
        for n in 1..=5 {
            for &pj in &[0.0, 1.0, 100.0, 1e4] {
                for &pr in &[0.0, 0.4, 1.0] {
                    let cfg = BroadcastConfig::new(n, [10.0, 6.0], [0.7, 0.5], pj, pr).unwrap();
                    let p = SuccessProbabilities::compute(&cfg).unwrap();
                    for i in 0..2 {
                        assert!((0.0..=1.0).contains(&p.single[i]));
                        assert!((0.0..=1.0).contains(&p.both[i]));
                        assert!(p.both[i] <= p.single[i]);
                    }
                }
            }
        }
    }

    #[test]
    fn axis_intercepts() {
        let cfg = reference_point(2);
        let r = stability_region(&cfg).unwrap();
        let p11 = r.probabilities.single[0];
        assert!(r.contains(0.0, 0.0));
        assert!(r.region_1.contains([p11 * (1.0 - 1e-9), 0.0]));
        assert!(!r.contains(p11 * (1.0 + 1e-9), 0.0));
        let p22 = r.probabilities.single[1];
        assert!(r.region_2.contains([0.0, p22 * (1.0 - 1e-9)]));
        assert!(!r.contains(0.0, p22 * (1.0 + 1e-9)));
        assert!(!r.degenerate());
        assert!(is_stable_pair(0.0, 0.0, &cfg).unwrap());
        assert!(is_stable_pair(-0.1, 0.0, &cfg).is_err());
    }

    #[test]
    fn corner_point_shared() {
        let r = stability_region(&reference_point(4)).unwrap();
        let p = r.probabilities;
        let v1 = r.region_1.vertices();
        let v2 = r.region_2.vertices();
        let corner = [p.both[0], p.both[1]];
        let near = |v: &Vec<[f64; 2]>| v.iter().any(|q| (q[0] - corner[0]).abs() < 1e-14 && (q[1] - corner[1]).abs() < 1e-14);
        assert!(near(&v1) && near(&v2));
        assert_eq!(v1[1], [p.single[0], 0.0]);
        assert_eq!(v2[v2.len() - 1], [0.0, p.single[1]]);
    }

    fn grid_contains(small: &StabilityRegion, big: &StabilityRegion) -> (bool, bool) {
        let top = small.probabilities.single[0].max(small.probabilities.single[1]).max(
            big.probabilities.single[0].max(big.probabilities.single[1]),
        ) * 1.05;
        let mut contained = true;
        let mut strict = false;
        for i in 0..200 {
            for j in 0..200 {
                let (x, y) = (top * f64::from(i) / 199.0, top * f64::from(j) / 199.0);
                let (s, b) = (small.contains(x, y), big.contains(x, y));
                contained &= !s || b;
                strict |= b && !s;
            }
        }
        (contained, strict)
    }

    #[test]
    fn more_antennas_enlarge_region() {
        let r2 = stability_region(&reference_point(2)).unwrap();
        let r3 = stability_region(&reference_point(3)).unwrap();
        let r4 = stability_region(&reference_point(4)).unwrap();
        assert_eq!(grid_contains(&r2, &r3), (true, true));
        assert_eq!(grid_contains(&r3, &r4), (true, true));
        assert_eq!(grid_contains(&r2, &r4), (true, true));
    }

    #[test]
    fn weaker_jammer_enlarges_region() {
        let base = stability_region(&reference_point(2)).unwrap();
        let quieter = stability_region(&BroadcastConfig::new(2, [10.0, 10.0], [0.7, 0.5], 10.0, 0.6).unwrap()).unwrap();
        let rarer = stability_region(&BroadcastConfig::new(2, [10.0, 10.0], [0.7, 0.5], 100.0, 0.2).unwrap()).unwrap();
        assert!(grid_contains(&base, &quieter).0);
        assert!(grid_contains(&base, &rarer).0);
    }

    #[test]
    fn degenerate_region_is_flagged() {
        let cfg = BroadcastConfig::new(2, [10.0, 10.0], [2.0, 0.5], 100.0, 0.6).unwrap();
        let r = stability_region(&cfg).unwrap();
        assert!(r.region_2.degenerate);
        // R2 collapses to the λ_2 axis.
        assert!(r.region_2.contains([0.0, 0.5 * r.probabilities.single[1]]));
        assert!(!r.region_2.contains([1e-6, 0.01]));
    }

    #[test]
    fn csv_export() {
        let r = stability_region(&reference_point(2)).unwrap();
        let mut buf = Vec::new();
        r.write_vertices_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("region,index,lambda_1,lambda_2\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("union,")).count(), 4);
    }
}
