//! Slot-level simulation of the transmit queue, the jammer's energy buffer
//! and the fading channel.
//!
//! Each slot runs in a fixed order:
//!
//! 1. the jammer flips its coin `c ~ Bern(p_J)` and an energy unit arrives
//!    with probability `δ`;
//! 2. with `c = 1` and a non-empty buffer the slot is jammed and the level
//!    becomes `level - 1 + arrival`; with `c = 1` and an empty buffer nothing
//!    is jammed and the arrival is lost; with `c = 0` the arrival is stored,
//!    capped at `B`;
//! 3. fading is drawn and, if a packet is waiting, the head of the queue is
//!    delivered when the rate clears `R`;
//! 4. this slot's packet arrival (`Bern(λ)`) joins the queue;
//! 5. the receiver's age is sampled and advanced by one.
//!
//! Because arrivals join after the service attempt, a packet is never served
//! in the slot it arrives in and every delay is at least 2 slots.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::energy::Capacity;
use crate::error::{domain, Result};
use crate::link_sim::{instantaneous_rate, stream_rng, FadingSampler, SamplingMethod};
use crate::service::{average_service_rate, ServiceContext, TrafficModel};

/// Smallest accepted run length.
pub const MIN_SLOTS: u64 = 100_000;

/// Number of contiguous batches behind the batch-means standard errors.
const BATCHES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub context: ServiceContext,
    pub traffic: TrafficModel,
    pub n_slots: u64,
    pub seed: u64,
    /// Leading fraction of slots excluded from all metrics.
    pub warmup_fraction: f64,
}

impl SimConfig {
    pub fn new(context: ServiceContext, traffic: TrafficModel, n_slots: u64, seed: u64) -> Result<Self> {
        if n_slots < MIN_SLOTS {
            return Err(domain(format!("need at least {MIN_SLOTS} slots, got {n_slots}")));
        }
        Ok(Self { context, traffic, n_slots, seed, warmup_fraction: 0.1 })
    }

    pub fn with_warmup(mut self, fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(domain(format!("warm-up fraction must lie in [0, 1), got {fraction}")));
        }
        self.warmup_fraction = fraction;
        Ok(self)
    }

    fn warmup_slots(&self) -> u64 {
        (self.n_slots as f64 * self.warmup_fraction).floor() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Fraction of all slots whose channel would have carried a packet:
    /// the time-average service rate.
    pub mu_hat: f64,
    pub mu_std_err: f64,
    /// Delivery fraction over slots that start with a backlogged queue.
    /// Biased when the jam state is correlated with the backlog.
    pub mu_busy_hat: f64,
    pub mu_busy_std_err: f64,
    /// Mean end-to-end delay `t - g + 1` of the packets delivered in the
    /// measurement window.
    pub delay_hat: f64,
    /// Mean number of transmission attempts per delivered packet.
    pub delay_tx_hat: f64,
    /// Mean time in system `t - g` per delivered packet.
    pub delay_queue_hat: f64,
    /// Time-average of the per-slot age samples.
    pub aaoi_hat: f64,
    /// Same average from the sawtooth areas between deliveries.
    pub aaoi_sawtooth: f64,
    /// Time-average queue length, measured after the slot's arrival.
    pub qlen_hat: f64,
    pub jam_fraction: f64,
    /// Batch-means standard error; the buffer state is autocorrelated.
    pub jam_std_err: f64,
    pub empty_fraction: f64,
    /// Batch-means standard error.
    pub empty_std_err: f64,
    pub deliveries: u64,
    pub n_slots: u64,
    pub warmup: u64,
    pub seed: u64,
    pub stream: u64,
    /// `λ >= μ` analytically: the queue grows and the averages do not settle.
    pub unstable_warning: bool,
}

impl MetricsReport {
    /// `D_T + D_Q`: attempts per packet plus time in system, the two delay
    /// components of the closed-form model measured separately.
    pub fn delay_components_sum(&self) -> f64 {
        self.delay_tx_hat + self.delay_queue_hat
    }

    pub fn binomial_std_err(p: f64, n: u64) -> f64 {
        if n == 0 {
            f64::NAN
        } else {
            (p * (1.0 - p) / n as f64).sqrt()
        }
    }
}

/// Run one replication on stream 0 of `cfg.seed`.
pub fn run_slots(cfg: &SimConfig) -> Result<MetricsReport> {
    run_stream(cfg, 0)
}

/// Run one replication on an explicit RNG stream of `cfg.seed`.
pub fn run_stream(cfg: &SimConfig, stream: u64) -> Result<MetricsReport> {
    let ctx = &cfg.context;
    let sampler = FadingSampler::for_antenna(&ctx.antenna, SamplingMethod::GammaShortcut)?;
    let jammed_budget = ctx.budget;
    let clear_budget = ctx.budget.with_power_jam(0.0)?;
    let rate = ctx.budget.target_rate;
    let cap = match ctx.jammer.capacity {
        Capacity::Infinite => u64::MAX,
        Capacity::Finite(b) => u64::from(b),
    };
    let (p_jam, delta, lambda) = (ctx.jammer.p_jam, ctx.jammer.delta, cfg.traffic.lambda);
    let warm = cfg.warmup_slots();
    let mut rng = stream_rng(cfg.seed, stream);

    let mut queue: VecDeque<u64> = VecDeque::new();
    let mut level: u64 = 0;
    let mut age: u64 = 1;

    let (mut busy, mut served, mut potential) = (0u64, 0u64, 0u64);
    let (mut jammed_slots, mut empty_slots) = (0u64, 0u64);
    let (mut deliveries, mut delay_sum, mut attempts_sum) = (0u64, 0u128, 0u128);
    let mut head_attempts: u64 = 0;
    let (mut age_sum, mut qlen_sum) = (0u128, 0u128);
    let (mut seg_start, mut seg_age, mut saw_area) = (warm, 0u64, 0u128);
    let window = cfg.n_slots - warm;
    let mut batch_jam = [0u64; BATCHES];
    let mut batch_empty = [0u64; BATCHES];

    for t in 0..cfg.n_slots {
        let measuring = t >= warm;
        if t == warm {
            seg_age = age;
        }

        let coin = rng.random::<f64>() < p_jam;
        let energy = u64::from(rng.random::<f64>() < delta);
        let was_empty = level == 0;
        let jammed = coin && !was_empty;
        if coin {
            if !was_empty {
                level = level - 1 + energy;
            }
        } else {
            level = (level + energy).min(cap);
        }

        let draw = sampler.draw(&mut rng);
        let budget = if jammed { &jammed_budget } else { &clear_budget };
        let success = instantaneous_rate(&ctx.antenna, budget, &draw) >= rate;

        let mut delivered = None;
        if let Some(&generated) = queue.front() {
            if measuring {
                busy += 1;
            }
            head_attempts += 1;
            if success {
                queue.pop_front();
                delivered = Some(t - generated + 1);
            }
        }

        if rng.random::<f64>() < lambda {
            queue.push_back(t);
        }

        if let Some(d) = delivered {
            age = d;
        }

        if measuring {
            potential += u64::from(success);
            jammed_slots += u64::from(jammed);
            empty_slots += u64::from(was_empty);
            let k = ((u128::from(t - warm) * BATCHES as u128) / u128::from(window)) as usize;
            batch_jam[k] += u64::from(jammed);
            batch_empty[k] += u64::from(was_empty);
            qlen_sum += queue.len() as u128;
            age_sum += u128::from(age);
            if let Some(d) = delivered {
                served += 1;
                deliveries += 1;
                delay_sum += u128::from(d);
                attempts_sum += u128::from(head_attempts);
                saw_area += sawtooth(t - seg_start, seg_age);
                seg_start = t;
                seg_age = d;
            }
        }
        if delivered.is_some() {
            head_attempts = 0;
        }
        age += 1;
    }
    saw_area += sawtooth(cfg.n_slots - seg_start, seg_age);

    let wf = window as f64;
    let mu_hat = potential as f64 / wf;
    let mu_busy_hat = served as f64 / busy as f64;
    let df = deliveries as f64;
    let delay_hat = delay_sum as f64 / df;
    Ok(MetricsReport {
        mu_hat,
        mu_std_err: MetricsReport::binomial_std_err(mu_hat, window),
        mu_busy_hat,
        mu_busy_std_err: MetricsReport::binomial_std_err(mu_busy_hat, busy),
        delay_hat,
        delay_tx_hat: attempts_sum as f64 / df,
        delay_queue_hat: delay_hat - 1.0,
        aaoi_hat: age_sum as f64 / wf,
        aaoi_sawtooth: saw_area as f64 / wf,
        qlen_hat: qlen_sum as f64 / wf,
        jam_fraction: jammed_slots as f64 / wf,
        jam_std_err: batch_means_std_err(&batch_jam, window),
        empty_fraction: empty_slots as f64 / wf,
        empty_std_err: batch_means_std_err(&batch_empty, window),
        deliveries,
        n_slots: cfg.n_slots,
        warmup: warm,
        seed: cfg.seed,
        stream,
        unstable_warning: lambda >= average_service_rate(ctx)?,
    })
}

/// Standard error of a slot fraction from per-batch counts.
fn batch_means_std_err(counts: &[u64; BATCHES], window: u64) -> f64 {
    let nb = BATCHES as u64;
    let means: Vec<f64> = (0..nb)
        .map(|k| {
            let len = (k + 1) * window / nb - k * window / nb;
            counts[k as usize] as f64 / len as f64
        })
        .collect();
    let n = BATCHES as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Area of `len` unit-width age samples starting at `start` and rising by one.
fn sawtooth(len: u64, start: u64) -> u128 {
    let (l, a) = (u128::from(len), u128::from(start));
    l * a + l * l.saturating_sub(1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation across replications.
    pub std_dev: f64,
    /// `std_dev / sqrt(n_reps)`.
    pub std_err: f64,
}

impl MetricSummary {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / n;
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let std_dev = var.sqrt();
        Self { mean, std_dev, std_err: std_dev / n.sqrt() }
    }

    /// `mean ± z·std_err`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.std_err, self.mean + z * self.std_err)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub n_reps: u64,
    pub base_seed: u64,
    pub mu_hat: MetricSummary,
    pub mu_busy_hat: MetricSummary,
    pub delay_hat: MetricSummary,
    pub delay_tx_hat: MetricSummary,
    pub delay_queue_hat: MetricSummary,
    pub aaoi_hat: MetricSummary,
    pub qlen_hat: MetricSummary,
    pub jam_fraction: MetricSummary,
    pub empty_fraction: MetricSummary,
    pub reports: Vec<MetricsReport>,
}

/// Independent replications on streams `0..n_reps` of `cfg.seed`, run in
/// parallel and aggregated in stream order.
pub fn run_replications(cfg: &SimConfig, n_reps: u64) -> Result<ReplicationSummary> {
    if n_reps < 2 {
        return Err(domain(format!("need at least 2 replications, got {n_reps}")));
    }
    let reports = (0..n_reps)
        .into_par_iter()
        .map(|k| run_stream(cfg, k))
        .collect::<Result<Vec<_>>>()?;
    let stat = |f: fn(&MetricsReport) -> f64| MetricSummary::of(reports.iter().map(f));
    Ok(ReplicationSummary {
        n_reps,
        base_seed: cfg.seed,
        mu_hat: stat(|r| r.mu_hat),
        mu_busy_hat: stat(|r| r.mu_busy_hat),
        delay_hat: stat(|r| r.delay_hat),
        delay_tx_hat: stat(|r| r.delay_tx_hat),
        delay_queue_hat: stat(|r| r.delay_queue_hat),
        aaoi_hat: stat(|r| r.aaoi_hat),
        qlen_hat: stat(|r| r.qlen_hat),
        jam_fraction: stat(|r| r.jam_fraction),
        empty_fraction: stat(|r| r.empty_fraction),
        reports,
    })
}
