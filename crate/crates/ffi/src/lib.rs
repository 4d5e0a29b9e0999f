//! C ABI over the `ehjam` models.
//!
//! Conventions:
//! * every fallible function returns an [`EhjamStatus`] and writes results
//!   through out-pointers, which are left untouched on failure;
//! * links and broadcast configurations are opaque handles created by
//!   `*_new` and released by the matching `*_free`;
//! * the message for the most recent failure on the calling thread is
//!   available from [`ehjam_last_error_message`];
//! * panics never cross the boundary; they surface as `EHJAM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ehjam::broadcast::{stability_region, BroadcastConfig, SuccessProbabilities};
use ehjam::energy::buffer_steady_state;
use ehjam::system_sim::{run_slots, SimConfig};
use ehjam::{
    average_service_rate_with, latency_report, optimal_lambda_delay_constrained, optimal_lambda_unconstrained,
    outage_with_jamming, outage_without_jamming, AntennaConfig, Binding, BufferMode, Capacity, Error,
    JammerEnergyModel, LinkBudget, ServiceContext, TrafficModel,
};

/// Battery size meaning "unbounded".
pub const EHJAM_BATTERY_INFINITE: u32 = 0;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EhjamStatus {
    Ok = 0,
    /// Argument outside the domain of the model.
    Domain = 1,
    /// Antenna scheme and counts disagree.
    Config = 2,
    /// Arrival rate not below the service rate.
    Unstable = 3,
    /// Constrained problem has no feasible point.
    Infeasible = 4,
    /// A numerical routine could not be trusted.
    Numerical = 5,
    /// A required pointer was null.
    NullPointer = 6,
    /// Internal panic caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EhjamScheme {
    Miso = 0,
    Simo = 1,
    Alamouti = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EhjamBufferMode {
    CaseSplit = 0,
    Exact = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EhjamBinding {
    Interior = 0,
    DelayBound = 1,
    StabilityBound = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EhjamLatency {
    pub queue_length: f64,
    pub delay: f64,
    pub aaoi: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhjamOptimum {
    pub lambda_opt: f64,
    pub aaoi_opt: f64,
    pub delay_at_opt: f64,
    pub binding: EhjamBinding,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EhjamSuccess {
    /// Success probability of user 1 and 2 when transmitting alone.
    pub single: [f64; 2],
    /// Success probability of user 1 and 2 when both transmit.
    pub both: [f64; 2],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EhjamSimReport {
    pub mu_hat: f64,
    pub mu_std_err: f64,
    pub delay_hat: f64,
    pub delay_tx_hat: f64,
    pub delay_queue_hat: f64,
    pub aaoi_hat: f64,
    pub qlen_hat: f64,
    pub jam_fraction: f64,
    pub empty_fraction: f64,
    pub deliveries: u64,
    pub n_slots: u64,
    pub warmup: u64,
    pub seed: u64,
    pub unstable_warning: bool,
}

/// Opaque point-to-point link: antennas, powers, rate and jammer.
pub struct EhjamLink {
    ctx: ServiceContext,
    mode: BufferMode,
}

/// Opaque two-user broadcast configuration.
pub struct EhjamBroadcast {
    cfg: BroadcastConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EhjamStatus {
    match e {
        Error::Domain(_) => EhjamStatus::Domain,
        Error::Config(_) => EhjamStatus::Config,
        Error::Unstable { .. } => EhjamStatus::Unstable,
        Error::Infeasible(_) => EhjamStatus::Infeasible,
        Error::Numerical(_) => EhjamStatus::Numerical,
    }
}

struct Fail(EhjamStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(EhjamStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EhjamStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EhjamStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            EhjamStatus::Panic
        }
    }
}

/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `p` must be null or point to a live handle.
unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread, or null after a
/// success. The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ehjam_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ehjam_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a link. `battery` is the jammer's battery size in energy units,
/// or `EHJAM_BATTERY_INFINITE`. Powers are linear with unit noise.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ehjam_link_new(
    scheme: EhjamScheme,
    n_t: u32,
    n_r: u32,
    power_tx: f64,
    power_jam: f64,
    rate: f64,
    p_jam: f64,
    delta: f64,
    battery: u32,
    mode: EhjamBufferMode,
    out: *mut *mut EhjamLink,
) -> EhjamStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let scheme = match scheme {
            EhjamScheme::Miso => ehjam::Scheme::Miso,
            EhjamScheme::Simo => ehjam::Scheme::Simo,
            EhjamScheme::Alamouti => ehjam::Scheme::Alamouti,
        };
        let capacity = if battery == EHJAM_BATTERY_INFINITE { Capacity::Infinite } else { Capacity::finite(battery)? };
        let ctx = ServiceContext::new(
            AntennaConfig::new(scheme, n_t, n_r)?,
            LinkBudget::new(power_tx, power_jam, rate)?,
            JammerEnergyModel::new(p_jam, delta, capacity)?,
        );
        let mode = match mode {
            EhjamBufferMode::CaseSplit => BufferMode::CaseSplit,
            EhjamBufferMode::Exact => BufferMode::Exact,
        };
        out.write(Box::into_raw(Box::new(EhjamLink { ctx, mode })));
        Ok(())
    })
}

/// Release a link. Null is ignored.
///
/// # Safety
/// `link` must be null or a handle from `ehjam_link_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ehjam_link_free(link: *mut EhjamLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

/// Outage probability with a jamming burst and without one.
///
/// # Safety
/// `link` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ehjam_link_outage(
    link: *const EhjamLink,
    out_jam: *mut f64,
    out_no_jam: *mut f64,
) -> EhjamStatus {
    guard(|| {
        let l = borrow(link, "link")?;
        let jam = outage_with_jamming(&l.ctx.antenna, &l.ctx.budget)?;
        let no = outage_without_jamming(&l.ctx.antenna, l.ctx.budget.power_tx, l.ctx.budget.target_rate)?;
        if out_no_jam.is_null() {
            return Err(null("out_no_jam"));
        }
        write(out_jam, jam, "out_jam")?;
        out_no_jam.write(no);
        Ok(())
    })
}

/// Long-run probability that the jammer's battery is empty.
///
/// # Safety
/// `link` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ehjam_link_buffer_empty_probability(link: *const EhjamLink, out: *mut f64) -> EhjamStatus {
    guard(|| {
        let l = borrow(link, "link")?;
        write(out, buffer_steady_state(&l.ctx.jammer, l.mode).empty_prob, "out")
    })
}

/// Average per-slot service rate.
///
/// # Safety
/// `link` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ehjam_link_service_rate(link: *const EhjamLink, out: *mut f64) -> EhjamStatus {
    guard(|| {
        let l = borrow(link, "link")?;
        write(out, average_service_rate_with(&l.ctx, l.mode)?, "out")
    })
}

/// Queue length, delay and average age for arrival rate `lambda` and
/// service rate `mu`. Fails with `EHJAM_STATUS_UNSTABLE` unless `lambda < mu`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ehjam_latency(lambda: f64, mu: f64, out: *mut EhjamLatency) -> EhjamStatus {
    guard(|| {
        let r = latency_report(lambda, mu)?;
        write(out, EhjamLatency { queue_length: r.queue_len, delay: r.delay_total, aaoi: r.aaoi }, "out")
    })
}

/// Age-optimal arrival rate. Pass `d_th = INFINITY` for no delay cap.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ehjam_optimize(mu: f64, d_th: f64, out: *mut EhjamOptimum) -> EhjamStatus {
    guard(|| {
        let r = if d_th == f64::INFINITY {
            optimal_lambda_unconstrained(mu)?
        } else {
            optimal_lambda_delay_constrained(mu, d_th)?
        };
        let binding = match r.binding {
            Binding::Interior => EhjamBinding::Interior,
            Binding::DelayBound => EhjamBinding::DelayBound,
            Binding::StabilityBound => EhjamBinding::StabilityBound,
        };
        write(
            out,
            EhjamOptimum { lambda_opt: r.lambda_opt, aaoi_opt: r.aaoi_opt, delay_at_opt: r.delay_at_opt, binding },
            "out",
        )
    })
}

/// Slot-level simulation with Bernoulli(`lambda`) arrivals. The first
/// `warmup_fraction` of the slots is discarded.
///
/// # Safety
/// `link` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ehjam_link_simulate(
    link: *const EhjamLink,
    lambda: f64,
    n_slots: u64,
    warmup_fraction: f64,
    seed: u64,
    out: *mut EhjamSimReport,
) -> EhjamStatus {
    guard(|| {
        let l = borrow(link, "link")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = SimConfig::new(l.ctx, TrafficModel::new(lambda)?, n_slots, seed)?.with_warmup(warmup_fraction)?;
        let r = run_slots(&cfg)?;
        out.write(EhjamSimReport {
            mu_hat: r.mu_hat,
            mu_std_err: r.mu_std_err,
            delay_hat: r.delay_hat,
            delay_tx_hat: r.delay_tx_hat,
            delay_queue_hat: r.delay_queue_hat,
            aaoi_hat: r.aaoi_hat,
            qlen_hat: r.qlen_hat,
            jam_fraction: r.jam_fraction,
            empty_fraction: r.empty_fraction,
            deliveries: r.deliveries,
            n_slots: r.n_slots,
            warmup: r.warmup,
            seed: r.seed,
            unstable_warning: r.unstable_warning,
        });
        Ok(())
    })
}

/// Create a two-user broadcast configuration with `n_r` receive antennas
/// per user, powers `p1`/`p2`, decoding thresholds `gamma1`/`gamma2`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ehjam_broadcast_new(
    n_r: u32,
    p1: f64,
    p2: f64,
    gamma1: f64,
    gamma2: f64,
    power_jam: f64,
    p_jam: f64,
    out: *mut *mut EhjamBroadcast,
) -> EhjamStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = BroadcastConfig::new(n_r, [p1, p2], [gamma1, gamma2], power_jam, p_jam)?;
        out.write(Box::into_raw(Box::new(EhjamBroadcast { cfg })));
        Ok(())
    })
}

/// Release a broadcast configuration. Null is ignored.
///
/// # Safety
/// `b` must be null or a handle from `ehjam_broadcast_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ehjam_broadcast_free(b: *mut EhjamBroadcast) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// The four per-user success probabilities.
///
/// # Safety
/// `b` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ehjam_broadcast_probabilities(b: *const EhjamBroadcast, out: *mut EhjamSuccess) -> EhjamStatus {
    guard(|| {
        let b = borrow(b, "broadcast")?;
        let p = SuccessProbabilities::compute(&b.cfg)?;
        write(out, EhjamSuccess { single: p.single, both: p.both }, "out")
    })
}

/// Whether the arrival pair lies in the stability region.
///
/// # Safety
/// `b` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ehjam_broadcast_is_stable(
    b: *const EhjamBroadcast,
    lambda_1: f64,
    lambda_2: f64,
    out: *mut bool,
) -> EhjamStatus {
    guard(|| {
        let b = borrow(b, "broadcast")?;
        write(out, stability_region(&b.cfg)?.contains(lambda_1, lambda_2), "out")
    })
}

/// Vertices of the stability region's boundary, counter-clockwise from
/// the origin, as interleaved `(lambda_1, lambda_2)` pairs. Writes up to
/// `capacity` pairs into `xy` (which may be null when `capacity` is 0) and
/// the total number of vertices into `out_len`.
///
/// # Safety
/// `b` must be a live handle; `xy` must be valid for `2 * capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn ehjam_broadcast_region_vertices(
    b: *const EhjamBroadcast,
    xy: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> EhjamStatus {
    guard(|| {
        let b = borrow(b, "broadcast")?;
        let verts = stability_region(&b.cfg)?.union_vertices();
        if capacity > 0 && xy.is_null() {
            return Err(null("xy"));
        }
        for (k, v) in verts.iter().take(capacity).enumerate() {
            xy.add(2 * k).write(v[0]);
            xy.add(2 * k + 1).write(v[1]);
        }
        write(out_len, verts.len(), "out_len")
    })
}
