//! Closed form vs Monte Carlo vs slot simulation, as a table of gated checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, Write};
use std::time::Duration;

use crate::broadcast::{stability_region, BroadcastConfig, SuccessProbabilities, User};
use crate::energy::{BufferMode, Capacity, JammerEnergyModel};
use crate::error::Result;
use crate::latency::{aaoi, avg_delay};
use crate::link_sim::{estimate_broadcast_success, estimate_outage, BroadcastEvent};
use crate::optimize::{optimal_lambda_delay_constrained, optimal_lambda_unconstrained};
use crate::outage::{asymptotic_outage, outage_with_jamming, outage_without_jamming, AntennaConfig, LinkBudget, PowerRatio};
use crate::service::{average_service_rate_with, ServiceContext, TrafficModel};
use crate::system_sim::{run_slots, MetricsReport, SimConfig};
use crate::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub label: &'static str,
    pub draws: u64,
    pub slots: u64,
    /// Gate for Monte Carlo estimates, in standard errors.
    pub mc_sigma: f64,
    /// Gate for simulated rates and fractions, in standard errors.
    pub sim_sigma: f64,
    /// Relative gate for simulated delay and age.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Settings {
    pub fn quick(seed: u64) -> Self {
        Self { label: "quick", draws: 100_000, slots: 100_000, mc_sigma: 5.0, sim_sigma: 5.0, rel_tol: 0.05, seed }
    }

    pub fn full(seed: u64) -> Self {
        Self { label: "full", draws: 1_000_000, slots: 10_000_000, mc_sigma: 4.0, sim_sigma: 3.0, rel_tol: 0.02, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Abs,
    Rel,
    Sigma,
}

impl Unit {
    fn as_str(self) -> &'static str {
        match self {
            Unit::Abs => "abs",
            Unit::Rel => "rel",
            Unit::Sigma => "sigma",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub value: f64,
    pub reference: f64,
    /// Distance from the reference, measured in `unit`.
    pub error: f64,
    pub tolerance: f64,
    pub unit: Unit,
    pub passed: bool,
}

impl Check {
    fn abs(group: &'static str, name: impl Into<String>, value: f64, reference: f64, tol: f64) -> Self {
        Self::gate(group, name.into(), value, reference, (value - reference).abs(), tol, Unit::Abs)
    }

    fn rel(group: &'static str, name: impl Into<String>, value: f64, reference: f64, tol: f64) -> Self {
        let err = (value - reference).abs() / reference.abs();
        Self::gate(group, name.into(), value, reference, err, tol, Unit::Rel)
    }

    /// `std_err == 0` passes only on exact equality.
    fn sigma(group: &'static str, name: impl Into<String>, value: f64, reference: f64, std_err: f64, tol: f64) -> Self {
        let diff = (value - reference).abs();
        let err = if std_err > 0.0 {
            diff / std_err
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self::gate(group, name.into(), value, reference, err, tol, Unit::Sigma)
    }

    fn flag(group: &'static str, name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self::gate(group, name.into(), v, 1.0, 1.0 - v, 0.0, Unit::Abs)
    }

    fn gate(group: &'static str, name: String, value: f64, reference: f64, error: f64, tolerance: f64, unit: Unit) -> Self {
        Self { group, name, value, reference, error, tolerance, unit, passed: error <= tolerance }
    }
}

pub fn run_all(s: &Settings) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    checks.extend(table_checks()?);
    checks.extend(outage_mc_checks(s)?);
    checks.extend(identity_checks()?);
    checks.extend(asymptote_checks()?);
    checks.extend(battery_checks()?);
    checks.extend(optimizer_checks()?);
    checks.extend(broadcast_checks(s)?);
    checks.extend(simulation_checks(s)?);
    Ok(checks)
}

pub fn print_report<W: Write>(w: &mut W, s: &Settings, checks: &[Check], elapsed: Duration) -> io::Result<()> {
    writeln!(w, "validate --{} seed={} draws={} slots={}", s.label, s.seed, s.draws, s.slots)?;
    writeln!(
        w,
        "{:<10} {:<44} {:>14} {:>14} {:>11} {:>9} {:<5}  result",
        "group", "check", "value", "reference", "error", "gate", "unit"
    )?;
    for c in checks {
        writeln!(
            w,
            "{:<10} {:<44} {:>14.8} {:>14.8} {:>11.3e} {:>9.2e} {:<5}  {}",
            c.group,
            c.name,
            c.value,
            c.reference,
            c.error,
            c.tolerance,
            c.unit.as_str(),
            if c.passed { "PASS" } else { "FAIL" }
        )?;
    }
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    writeln!(w, "{} checks, {} failed, {:.1} s", checks.len(), failed.len(), elapsed.as_secs_f64())?;
    for c in failed {
        writeln!(w, "FAILED: {} / {}", c.group, c.name)?;
    }
    Ok(())
}

fn alamouti_mu(power_jam: f64) -> Result<f64> {
    let ctx = ServiceContext::new(
        AntennaConfig::alamouti(2, 2)?,
        LinkBudget::new(100.0, power_jam, 1.0)?,
        JammerEnergyModel::new(0.7, 0.6, Capacity::Infinite)?,
    );
    average_service_rate_with(&ctx, BufferMode::CaseSplit)
}

/// Reference optimum arrival rates for the 2x2 Alamouti link:
/// `(P_J, delay-tolerant, delay-capped at 2.25)`.
pub const TABLE: [(f64, f64, f64); 13] = [
    (10.0, 0.9804, 0.9800),
    (15.0, 0.9631, 0.9626),
    (20.0, 0.9439, 0.9435),
    (25.0, 0.9241, 0.9240),
    (30.0, 0.9044, 0.9044),
    (35.0, 0.8851, 0.8852),
    (40.0, 0.8665, 0.8665),
    (45.0, 0.8488, 0.8487),
    (50.0, 0.8319, 0.8318),
    (55.0, 0.8158, 0.8045),
    (60.0, 0.8006, 0.7646),
    (65.0, 0.7862, 0.7217),
    (70.0, 0.7726, 0.6746),
];

fn table_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &(pj, tolerant, capped) in &TABLE {
        let mu = alamouti_mu(pj)?;
        let free = optimal_lambda_unconstrained(mu)?.lambda_opt;
        out.push(Check::abs("table", format!("lambda* P_J={pj}"), free, tolerant, 0.005));
        let bound = optimal_lambda_delay_constrained(mu, 2.25)?.lambda_opt;
        out.push(Check::abs("table", format!("lambda* P_J={pj} d_th=2.25"), bound, capped, 0.005));
    }
    Ok(out)
}

fn schemes() -> Result<[AntennaConfig; 3]> {
    Ok([AntennaConfig::miso(2)?, AntennaConfig::simo(2)?, AntennaConfig::alamouti(2, 2)?])
}

/// `(P dB, P_J dB, R)` grid shared by the outage checks.
pub const OUTAGE_GRID: [(f64, f64, f64); 4] = [(10.0, 10.0, 1.0), (20.0, 20.0, 1.0), (20.0, 10.0, 2.0), (15.0, 25.0, 0.5)];

fn outage_mc_checks(s: &Settings) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (k, ant) in schemes()?.iter().enumerate() {
        for (g, &(p_db, pj_db, rate)) in OUTAGE_GRID.iter().enumerate() {
            let budget = LinkBudget::new(db_to_linear(p_db), db_to_linear(pj_db), rate)?;
            let p = outage_with_jamming(ant, &budget)?;
            let seed = s.seed.wrapping_add((k * OUTAGE_GRID.len() + g) as u64);
            let est = estimate_outage(ant, &budget, s.draws, seed)?;
            let se = (p * (1.0 - p) / s.draws as f64).sqrt();
            let name = format!("{} P={p_db}dB PJ={pj_db}dB R={rate}", ant.scheme());
            out.push(Check::sigma("outage-mc", name, est.p_hat, p, se, s.mc_sigma));
        }
    }
    Ok(out)
}

fn identity_checks() -> Result<Vec<Check>> {
    const TOL: f64 = 1e-12;
    let mut out = Vec::new();
    for &(p_db, pj_db, rate) in &OUTAGE_GRID {
        let budget = LinkBudget::new(db_to_linear(p_db), db_to_linear(pj_db), rate)?;
        let tag = format!("P={p_db}dB PJ={pj_db}dB R={rate}");
        let miso1 = outage_with_jamming(&AntennaConfig::miso(1)?, &budget)?;
        let simo1 = outage_with_jamming(&AntennaConfig::simo(1)?, &budget)?;
        out.push(Check::abs("identity", format!("miso(1)=simo(1) {tag}"), miso1, simo1, TOL));
        for nt in 1..=4 {
            let ala = outage_with_jamming(&AntennaConfig::alamouti(nt, 1)?, &budget)?;
            let miso = outage_with_jamming(&AntennaConfig::miso(nt)?, &budget)?;
            out.push(Check::abs("identity", format!("alamouti({nt},1)=miso({nt}) {tag}"), ala, miso, TOL));
        }
    }

    // Service rate at p_J = δ from the energy-limited branch vs the
    // always-charged expression, and finite vs infinite battery below δ.
    let ant = AntennaConfig::simo(2)?;
    let budget = LinkBudget::new(100.0, 100.0, 1.0)?;
    let p_nojam = outage_without_jamming(&ant, budget.power_tx, budget.target_rate)?;
    let p_jam = outage_with_jamming(&ant, &budget)?;
    for &delta in &[0.2, 0.5, 0.8] {
        let model = JammerEnergyModel::new(delta, delta, Capacity::Infinite)?;
        let mu = average_service_rate_with(&ServiceContext::new(ant, budget, model), BufferMode::CaseSplit)?;
        let charged = (1.0 - delta) * (1.0 - p_nojam) + delta * (1.0 - p_jam);
        out.push(Check::abs("identity", format!("mu continuous at p_J=delta={delta}"), mu, charged, TOL));
        for b in [1, 2, 10] {
            let below = delta * 0.5;
            let fin = JammerEnergyModel::new(below, delta, Capacity::Finite(b))?;
            let inf = JammerEnergyModel::new(below, delta, Capacity::Infinite)?;
            let mf = average_service_rate_with(&ServiceContext::new(ant, budget, fin), BufferMode::CaseSplit)?;
            let mi = average_service_rate_with(&ServiceContext::new(ant, budget, inf), BufferMode::CaseSplit)?;
            out.push(Check::abs("identity", format!("mu B={b} = B=inf at p_J={below}<delta"), mf, mi, TOL));
        }
    }
    Ok(out)
}

fn asymptote_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let p = 1e6;
    for ant in schemes()? {
        for eta in [1.0, 2.0, 10.0] {
            let exact = outage_with_jamming(&ant, &LinkBudget::new(p, eta * p, 1.0)?)?;
            let limit = asymptotic_outage(&ant, PowerRatio::new(eta)?, 1.0)?;
            out.push(Check::abs("asymptote", format!("{} eta={eta} P=1e6", ant.scheme()), exact, limit, 1e-3));
        }
    }
    Ok(out)
}

fn battery_mu(cap: Capacity) -> Result<f64> {
    let ctx = ServiceContext::new(
        AntennaConfig::simo(2)?,
        LinkBudget::new(100.0, 100.0, 1.0)?,
        JammerEnergyModel::new(0.7, 0.6, cap)?,
    );
    average_service_rate_with(&ctx, BufferMode::CaseSplit)
}

fn battery_checks() -> Result<Vec<Check>> {
    let inf = battery_mu(Capacity::Infinite)?;
    let b200 = battery_mu(Capacity::Finite(200))?;
    let mut monotone = true;
    let mut prev = battery_mu(Capacity::Finite(1))?;
    for b in 2..=200 {
        let mu = battery_mu(Capacity::Finite(b))?;
        monotone &= mu <= prev;
        prev = mu;
    }
    Ok(vec![
        Check::abs("battery", "mu(B=200) vs mu(B=inf)", b200, inf, 1e-6),
        Check::flag("battery", "mu non-increasing in B=1..200", monotone),
    ])
}

fn optimizer_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for k in 1..=9 {
        let mu = f64::from(k) / 10.0;
        let root = optimal_lambda_unconstrained(mu)?.lambda_opt;
        let n = (mu / 1e-4).floor() as u64;
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..n {
            let lambda = i as f64 * 1e-4;
            if lambda >= mu {
                break;
            }
            let a = aaoi(lambda, mu)?;
            if a < best.0 {
                best = (a, lambda);
            }
        }
        out.push(Check::abs("optimizer", format!("root vs grid argmin mu={mu}"), root, best.1, 1e-4));
    }
    Ok(out)
}

/// Deterministic spread of broadcast configurations.
pub fn fuzzed_broadcast_configs(seed: u64, n: usize) -> Result<Vec<BroadcastConfig>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let n_r = rng.random_range(1..=4);
            let power = [db_to_linear(rng.random_range(0.0..20.0)), db_to_linear(rng.random_range(0.0..20.0))];
            let thresholds = [rng.random_range(0.1..1.0), rng.random_range(0.1..1.0)];
            let power_jam = db_to_linear(rng.random_range(0.0..25.0));
            let p_jam = rng.random_range(0.0..1.0);
            BroadcastConfig::new(n_r, power, thresholds, power_jam, p_jam)
        })
        .collect()
}

/// Parameters of the two-user comparison point: `P1 = P2 = 10`, `P_J = 100`,
/// `γ = (0.7, 0.5)`, `p_J = 0.6`.
pub fn region_point(n_r: u32) -> Result<BroadcastConfig> {
    BroadcastConfig::new(n_r, [10.0, 10.0], [0.7, 0.5], 100.0, 0.6)
}

/// Grid points of `[0,1]²` inside `small` but outside `large`.
pub fn containment_violations(n_small: u32, n_large: u32, grid: u32) -> Result<u64> {
    let small = stability_region(&region_point(n_small)?)?;
    let large = stability_region(&region_point(n_large)?)?;
    let mut bad = 0;
    for i in 0..grid {
        for j in 0..grid {
            let l1 = (f64::from(i) + 0.5) / f64::from(grid);
            let l2 = (f64::from(j) + 0.5) / f64::from(grid);
            if small.contains(l1, l2) && !large.contains(l1, l2) {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

fn broadcast_checks(s: &Settings) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (k, cfg) in fuzzed_broadcast_configs(s.seed, 8)?.iter().enumerate() {
        let probs = SuccessProbabilities::compute(cfg)?;
        for (u, user) in [User::One, User::Two].into_iter().enumerate() {
            for (event, p, tag) in
                [(BroadcastEvent::Single, probs.single[u], "alone"), (BroadcastEvent::Both, probs.both[u], "both")]
            {
                let seed = s.seed.wrapping_add(1000 + 4 * k as u64 + 2 * u as u64 + (event == BroadcastEvent::Both) as u64);
                let est = estimate_broadcast_success(cfg, user, event, s.draws, seed)?;
                let se = (p * (1.0 - p) / s.draws as f64).sqrt();
                let name = format!("cfg{k} n_r={} user {user} {tag}", cfg.n_r);
                out.push(Check::sigma("broadcast", name, est.p_hat, p, se, s.mc_sigma));
            }
        }
    }
    let bad = containment_violations(2, 4, 200)?;
    out.push(Check::abs("broadcast", "region n_r=4 contains n_r=2 (200x200)", bad as f64, 0.0, 0.0));
    Ok(out)
}

fn simulation_checks(s: &Settings) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let ant = AntennaConfig::simo(2)?;
    let budget = LinkBudget::new(100.0, 100.0, 1.0)?;
    let lambda = 0.2;
    for (k, &(p_jam, delta)) in [(0.3, 0.6), (0.7, 0.6)].iter().enumerate() {
        let model = JammerEnergyModel::new(p_jam, delta, Capacity::Infinite)?;
        let ctx = ServiceContext::new(ant, budget, model);
        let cfg = SimConfig::new(ctx, TrafficModel::new(lambda)?, s.slots, s.seed.wrapping_add(k as u64))?;
        let r = run_slots(&cfg)?;
        let tag = format!("p_J={p_jam} delta={delta}");
        let mu = average_service_rate_with(&ctx, BufferMode::CaseSplit)?;
        let n = r.n_slots - r.warmup;
        out.push(Check::sigma(
            "sim",
            format!("mu {tag}"),
            r.mu_hat,
            mu,
            MetricsReport::binomial_std_err(mu, n),
            s.sim_sigma,
        ));
        let empty = crate::energy::empty_probability_case_split(&model);
        out.push(Check::sigma("sim", format!("battery empty {tag}"), r.empty_fraction, empty, r.empty_std_err, s.sim_sigma));
        let jam = p_jam * (1.0 - empty);
        out.push(Check::sigma("sim", format!("jam fraction {tag}"), r.jam_fraction, jam, r.jam_std_err, s.sim_sigma));
        if k == 0 {
            out.push(Check::rel("sim", format!("AAoI {tag}"), r.aaoi_hat, aaoi(lambda, mu)?, s.rel_tol));
            let d = avg_delay(lambda, mu)?;
            out.push(Check::rel("sim", format!("delay end-to-end {tag}"), r.delay_hat, d, s.rel_tol));
            out.push(Check::rel("sim", format!("delay tx+queue {tag}"), r.delay_components_sum(), d, s.rel_tol));
        }
    }
    Ok(out)
}
