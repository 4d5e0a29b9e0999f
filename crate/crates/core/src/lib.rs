//! Outage, service-rate, delay and age-of-information models for a
//! multi-antenna link attacked by an energy-harvesting jammer, together
//! with Monte Carlo and slot-level simulators that check them.
//!
//! Powers are linear with unit noise variance; rates are in bits per
//! channel use; time is in slots.
//!
//! ```
//! use ehjam::{AntennaConfig, Capacity, JammerEnergyModel, LinkBudget, ServiceContext};
//!
//! let ctx = ServiceContext::new(
//!     AntennaConfig::alamouti(2, 2)?,
//!     LinkBudget::new(100.0, 10.0, 1.0)?,
//!     JammerEnergyModel::new(0.7, 0.6, Capacity::Infinite)?,
//! );
//! let mu = ehjam::average_service_rate(&ctx)?;
//! let best = ehjam::optimal_lambda_unconstrained(mu)?;
//! assert!(best.lambda_opt < mu);
//! # Ok::<(), ehjam::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod broadcast;
pub mod cli;
pub mod energy;
pub mod error;
pub mod latency;
pub mod link_sim;
pub mod optimize;
pub mod outage;
pub mod service;
pub mod special;
pub mod system_sim;

pub use broadcast::{
    is_stable_pair, stability_region, success_prob_both, success_prob_single, BroadcastConfig, StabilityRegion,
    SuccessProbabilities, User,
};
pub use energy::{
    buffer_steady_state, empty_probability_exact, empty_probability_case_split, steady_state_distribution, BufferMode,
    BufferSteadyState, Capacity, EmptyProbability, JammerEnergyModel,
};
pub use error::{Error, Result};
pub use latency::{aaoi, aaoi_derivative, avg_delay, avg_queue_length, latency_report, LatencyReport};
pub use link_sim::{estimate_outage, instantaneous_rate, FadingDraw, MonteCarloEstimate};
pub use optimize::{
    optimal_lambda_delay_constrained, optimal_lambda_unconstrained, quartic_roots, Binding, OptimizationResult,
};
pub use outage::{
    asymptotic_outage, decoding_threshold, outage_with_jamming, outage_without_jamming, AntennaConfig, LinkBudget,
    PowerRatio, Scheme,
};
pub use service::{average_service_rate, average_service_rate_with, is_stable, ServiceContext, TrafficModel};
pub use system_sim::{run_replications, run_slots, MetricsReport, ReplicationSummary, SimConfig};

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10·log10(x)`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
