//! Monte Carlo estimation of outage and broadcast success events by direct
//! sampling of the fading model.
//!
//! Draws are split into fixed-size chunks. Chunk `k` uses its own ChaCha8
//! stream (`seed`, stream `k`), so a result depends only on the seed and the
//! draw count, never on the number of worker threads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::broadcast::{BroadcastConfig, User};
use crate::error::{domain, Error, Result};
use crate::outage::{AntennaConfig, LinkBudget};

/// Smallest accepted sample size for the outage estimators.
pub const MIN_DRAWS: u64 = 10_000;

const CHUNK: u64 = 1 << 16;

/// One channel realisation: the effective gain `|h|²` or `‖H‖²_F` and the
/// jammer gain `|h_J|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingDraw {
    pub channel_gain: f64,
    pub jam_gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n_draws: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_count(hits: u64, n_draws: u64, seed: u64) -> Self {
        let p_hat = hits as f64 / n_draws as f64;
        Self { p_hat, std_err: (p_hat * (1.0 - p_hat) / n_draws as f64).sqrt(), n_draws, seed }
    }

    /// `|p̂ - p| / SE`, with a zero-variance estimate scoring zero only on an
    /// exact match.
    pub fn z_score(&self, p: f64) -> f64 {
        let diff = (self.p_hat - p).abs();
        if self.std_err > 0.0 {
            diff / self.std_err
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    /// Gains drawn directly as `Gamma(n, 1)` and `Exp(1)`.
    #[default]
    GammaShortcut,
    /// Gains built from unit-variance complex Gaussian entries.
    RawComplex,
}

/// Sampler for `FadingDraw`s with a fixed diversity order.
#[derive(Debug, Clone, Copy)]
pub struct FadingSampler {
    diversity: u32,
    gamma: Gamma<f64>,
    method: SamplingMethod,
}

impl FadingSampler {
    pub fn new(diversity: u32, method: SamplingMethod) -> Result<Self> {
        if diversity == 0 {
            return Err(domain("diversity order must be at least 1"));
        }
        let gamma = Gamma::new(f64::from(diversity), 1.0)
            .map_err(|e| Error::Numerical(format!("gamma sampler: {e}")))?;
        Ok(Self { diversity, gamma, method })
    }

    pub fn for_antenna(config: &AntennaConfig, method: SamplingMethod) -> Result<Self> {
        Self::new(config.diversity(), method)
    }

    pub fn channel_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.method {
            SamplingMethod::GammaShortcut => self.gamma.sample(rng),
            SamplingMethod::RawComplex => (0..self.diversity).map(|_| complex_gain(rng)).sum(),
        }
    }

    pub fn jam_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.method {
            SamplingMethod::GammaShortcut => Exp1.sample(rng),
            SamplingMethod::RawComplex => complex_gain(rng),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> FadingDraw {
        FadingDraw { channel_gain: self.channel_gain(rng), jam_gain: self.jam_gain(rng) }
    }
}

/// `|h|²` for `h ~ CN(0, 1)`.
fn complex_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    0.5 * (re * re + im * im)
}

/// `log2(1 + P·share·gain / (1 + P_J·jam_gain))` in bits per channel use.
pub fn instantaneous_rate(config: &AntennaConfig, budget: &LinkBudget, draw: &FadingDraw) -> f64 {
    let signal = budget.power_tx * config.power_share() * draw.channel_gain;
    let jam = if budget.power_jam == 0.0 { 0.0 } else { budget.power_jam * draw.jam_gain };
    (signal / (1.0 + jam)).ln_1p() / std::f64::consts::LN_2
}

/// Seeded generator for chunk `stream` of a run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Count draws for which `event` holds, in parallel over fixed chunks.
pub fn parallel_count<F>(n_draws: u64, seed: u64, event: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let chunks = n_draws.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k);
            let len = CHUNK.min(n_draws - k * CHUNK);
            (0..len).filter(|_| event(&mut rng)).count() as u64
        })
        .sum()
}

fn check_draws(n_draws: u64) -> Result<()> {
    if n_draws < MIN_DRAWS {
        Err(domain(format!("need at least {MIN_DRAWS} draws, got {n_draws}")))
    } else {
        Ok(())
    }
}

/// Fraction of draws with `instantaneous_rate < R`, jammer always on.
pub fn estimate_outage(config: &AntennaConfig, budget: &LinkBudget, n_draws: u64, seed: u64) -> Result<MonteCarloEstimate> {
    estimate_outage_with(config, budget, n_draws, seed, SamplingMethod::GammaShortcut)
}

pub fn estimate_outage_with(
    config: &AntennaConfig,
    budget: &LinkBudget,
    n_draws: u64,
    seed: u64,
    method: SamplingMethod,
) -> Result<MonteCarloEstimate> {
    check_draws(n_draws)?;
    let sampler = FadingSampler::for_antenna(config, method)?;
    let rate = budget.target_rate;
    let hits = parallel_count(n_draws, seed, |rng| instantaneous_rate(config, budget, &sampler.draw(rng)) < rate);
    Ok(MonteCarloEstimate::from_count(hits, n_draws, seed))
}

/// Which broadcast decoding event to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BroadcastEvent {
    /// Only the user's own queue transmits: `SNR_i` or `SJNR_i` clears `γ_i`.
    Single,
    /// Both queues transmit: `SINR_i` or `SJINR_i` clears `γ_i`.
    Both,
}

/// Monte Carlo estimate of a broadcast success probability. Each draw flips
/// the jam coin with probability `p_J`, then samples the user's channel and
/// jammer gains.
pub fn estimate_broadcast_success(
    cfg: &BroadcastConfig,
    user: User,
    event: BroadcastEvent,
    n_draws: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_draws(n_draws)?;
    let sampler = FadingSampler::new(cfg.n_r, SamplingMethod::GammaShortcut)?;
    let (i, j) = match user {
        User::One => (0, 1),
        User::Two => (1, 0),
    };
    let (own, other, gamma) = (cfg.power[i], cfg.power[j], cfg.thresholds[i]);
    let hits = parallel_count(n_draws, seed, |rng| {
        let jammed = rng.random::<f64>() < cfg.p_jam;
        let draw = sampler.draw(rng);
        let jam = if jammed { cfg.power_jam * draw.jam_gain } else { 0.0 };
        let interference = match event {
            BroadcastEvent::Single => 0.0,
            BroadcastEvent::Both => other * draw.channel_gain,
        };
        own * draw.channel_gain / (1.0 + interference + jam) >= gamma
    });
    Ok(MonteCarloEstimate::from_count(hits, n_draws, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outage::{outage_with_jamming, outage_without_jamming};

    #[test]
    fn rate_examples() {
        let siso = AntennaConfig::simo(1).unwrap();
        let b = LinkBudget::new(1.0, 0.0, 1.0).unwrap();
        let zero = FadingDraw { channel_gain: 0.0, jam_gain: 0.0 };
        assert_eq!(instantaneous_rate(&siso, &b, &zero), 0.0);
        let one = FadingDraw { channel_gain: 1.0, jam_gain: 5.0 };
        assert!((instantaneous_rate(&siso, &b, &one) - 1.0).abs() < 1e-15);
        let miso = AntennaConfig::miso(2).unwrap();
        let b = LinkBudget::new(4.0, 1.0, 1.0).unwrap();
        let d = FadingDraw { channel_gain: 3.0, jam_gain: 2.0 };
        assert!((instantaneous_rate(&miso, &b, &d) - 3f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn variate_means() {
        let n = 1_000_000u64;
        for diversity in [1, 2, 4] {
            let s = FadingSampler::new(diversity, SamplingMethod::GammaShortcut).unwrap();
            let mut rng = stream_rng(7, 0);
            let (mut sg, mut sg2, mut se, mut se2) = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..n {
                let d = s.draw(&mut rng);
                sg += d.channel_gain;
                sg2 += d.channel_gain * d.channel_gain;
                se += d.jam_gain;
                se2 += d.jam_gain * d.jam_gain;
            }
            let nf = n as f64;
            let (mg, me) = (sg / nf, se / nf);
            let seg = ((sg2 / nf - mg * mg) / nf).sqrt();
            let see = ((se2 / nf - me * me) / nf).sqrt();
            assert!((mg - f64::from(diversity)).abs() < 4.0 * seg);
            assert!((me - 1.0).abs() < 4.0 * see);
        }
    }

    #[test]
    fn raw_complex_matches_shortcut() {
        let cfg = AntennaConfig::alamouti(2, 2).unwrap();
        let b = LinkBudget::new(10.0, 10.0, 1.0).unwrap();
        let fast = estimate_outage_with(&cfg, &b, 200_000, 3, SamplingMethod::GammaShortcut).unwrap();
        let raw = estimate_outage_with(&cfg, &b, 200_000, 4, SamplingMethod::RawComplex).unwrap();
        let exact = outage_with_jamming(&cfg, &b).unwrap();
        assert!(fast.z_score(exact) < 4.0);
        assert!(raw.z_score(exact) < 4.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = AntennaConfig::simo(2).unwrap();
        let b = LinkBudget::new(100.0, 100.0, 1.0).unwrap();
        let a = estimate_outage(&cfg, &b, 100_000, 11).unwrap();
        let c = estimate_outage(&cfg, &b, 100_000, 11).unwrap();
        assert_eq!(a, c);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| estimate_outage(&cfg, &b, 100_000, 11).unwrap());
        assert_eq!(a, single);
        assert!(estimate_outage(&cfg, &b, 9_999, 11).is_err());
    }

    #[test]
    fn std_err_scaling() {
        let cfg = AntennaConfig::simo(2).unwrap();
        let b = LinkBudget::new(10.0, 10.0, 1.0).unwrap();
        let small = estimate_outage(&cfg, &b, 100_000, 1).unwrap();
        let big = estimate_outage(&cfg, &b, 400_000, 2).unwrap();
        let ratio = big.std_err / small.std_err;
        assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn tiny_rate_never_outage() {
        let cfg = AntennaConfig::simo(2).unwrap();
        let b = LinkBudget::new(100.0, 100.0, 1e-300).unwrap();
        assert_eq!(estimate_outage(&cfg, &b, 10_000, 5).unwrap().p_hat, 0.0);
    }

    #[test]
    fn matches_closed_forms() {
        let cfg = AntennaConfig::simo(2).unwrap();
        let b = LinkBudget::new(100.0, 100.0, 1.0).unwrap();
        let est = estimate_outage(&cfg, &b, 1_000_000, 21).unwrap();
        assert!(est.z_score(outage_with_jamming(&cfg, &b).unwrap()) < 4.0);

        let cfg = AntennaConfig::simo(3).unwrap();
        let b = LinkBudget::new(10.0, 0.0, 2.0).unwrap();
        let est = estimate_outage(&cfg, &b, 1_000_000, 22).unwrap();
        assert!(est.z_score(outage_without_jamming(&cfg, 10.0, 2.0).unwrap()) < 4.0);

        let siso = AntennaConfig::simo(1).unwrap();
        let b = LinkBudget::new(100.0, 0.0, 1.0).unwrap();
        let est = estimate_outage(&siso, &b, 1_000_000, 23).unwrap();
        assert!(est.z_score(1.0 - (-0.01f64).exp()) < 4.0);
    }

    #[test]
    fn broadcast_events() {
        use crate::broadcast::{success_prob_both, success_prob_single};
        let cfg = BroadcastConfig::new(2, [10.0, 10.0], [0.5, 0.5], 100.0, 0.6).unwrap();
        let est = estimate_broadcast_success(&cfg, User::One, BroadcastEvent::Single, 400_000, 31).unwrap();
        assert!(est.z_score(success_prob_single(User::One, &cfg).unwrap()) < 4.0);
        let cfg = BroadcastConfig::new(4, [10.0, 10.0], [0.7, 0.5], 100.0, 0.6).unwrap();
        for (k, user) in [User::One, User::Two].into_iter().enumerate() {
            let est = estimate_broadcast_success(&cfg, user, BroadcastEvent::Both, 400_000, 40 + k as u64).unwrap();
            assert!(est.z_score(success_prob_both(user, &cfg).unwrap()) < 4.0);
        }
    }
}
