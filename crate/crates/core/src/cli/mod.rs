//! Command-line front end: parameter sweeps over the closed forms, slot
//! simulation, and the validation suite.
//!
//! Every numeric flag takes a single value, a `start:step:stop` range or a
//! comma-separated list; multiple swept flags expand to their cartesian
//! product. dB flags are converted to linear once, here. Exit codes: 0 on
//! success, 1 when a validation gate fails, 2 for usage and input errors.

pub mod sweep;
pub mod table;
pub mod validate;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use crate::broadcast::{stability_region, BroadcastConfig};
use crate::energy::{BufferMode, Capacity, JammerEnergyModel};
use crate::error::Error;
use crate::latency::{aaoi, avg_delay, avg_queue_length};
use crate::optimize::{optimal_lambda_delay_constrained, optimal_lambda_unconstrained, OptimizationResult};
use crate::outage::{asymptotic_outage, outage_with_jamming, outage_without_jamming, AntennaConfig, LinkBudget, PowerRatio, Scheme};
use crate::service::{average_service_rate_with, ServiceContext, TrafficModel};
use crate::system_sim::{run_replications, run_slots, MetricSummary, MetricsReport, SimConfig};
use crate::{db_to_linear, linear_to_db};

use sweep::{product, CapacitySweep, Sweep, SweepError};
use table::{Cell, Table};

#[derive(Debug, Parser)]
#[command(name = "ehjam", version, about = "Outage, service-rate, delay and AoI under an energy-harvesting jammer")]
pub struct Cli {
    /// Worker threads for sweeps and Monte Carlo (0 = one per core).
    #[arg(long, global = true, env = "EHJAM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outage probability with and without jamming, plus its high-power limit.
    Outage(OutageArgs),
    /// Service rate, queue length, delay and AAoI.
    ServiceLatency(ServiceArgs),
    /// AAoI-optimal arrival rate, optionally under a delay cap.
    Optimize(OptimizeArgs),
    /// Stability region of the two-user broadcast channel.
    StabilityRegion(RegionArgs),
    /// Slot-level simulation of queue, battery and channel.
    Simulate(SimulateArgs),
    /// Run the closed-form vs Monte Carlo vs simulation checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    CaseSplit,
    Exact,
}

impl From<ModeArg> for BufferMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::CaseSplit => BufferMode::CaseSplit,
            ModeArg::Exact => BufferMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LinkArgs {
    /// Antenna schemes: miso, simo, alamouti (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "alamouti")]
    pub scheme: Vec<Scheme>,
    /// Transmit antennas (MISO and Alamouti).
    #[arg(long, default_value = "2")]
    pub ntx: Sweep,
    /// Receive antennas (SIMO and Alamouti).
    #[arg(long, default_value = "2")]
    pub nrx: Sweep,
    /// Transmit power in dB [default: 20].
    #[arg(long = "p-db", conflicts_with = "p")]
    pub p_db: Option<Sweep>,
    /// Transmit power, linear.
    #[arg(long)]
    pub p: Option<Sweep>,
    /// Jamming power in dB [default: 20].
    #[arg(long = "pj-db", conflicts_with = "pj")]
    pub pj_db: Option<Sweep>,
    /// Jamming power, linear.
    #[arg(long)]
    pub pj: Option<Sweep>,
    /// Target rate in bits per channel use.
    #[arg(long, default_value = "1")]
    pub rate: Sweep,
}

#[derive(Debug, Clone, Args)]
pub struct JammerArgs {
    /// Energy arrival probability per slot.
    #[arg(long, default_value = "0.6")]
    pub delta: Sweep,
    /// Jamming attempt probability per slot.
    #[arg(long, default_value = "0.7")]
    pub pjam: Sweep,
    /// Empty-buffer model: the two-case closed form or the exact chain.
    #[arg(long, value_enum, default_value_t = ModeArg::CaseSplit)]
    pub buffer_mode: ModeArg,
}

#[derive(Debug, Clone, Args)]
pub struct OutageArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    /// Power ratio P_J/P for the asymptotic column [default: P_J/P per row].
    #[arg(long)]
    pub eta: Option<Sweep>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ServiceArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub jammer: JammerArgs,
    /// Packet arrival probability per slot.
    #[arg(long, default_value = "0.2")]
    pub lambda: Sweep,
    /// Jammer battery size: integers or 'inf'.
    #[arg(long, default_value = "2")]
    pub battery: CapacitySweep,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub jammer: JammerArgs,
    #[arg(long, default_value = "inf")]
    pub battery: CapacitySweep,
    /// Delay threshold in slots; omit for the delay-tolerant optimum.
    #[arg(long)]
    pub dth: Option<Sweep>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    /// Receive antennas per user.
    #[arg(long, default_value = "2")]
    pub nrx: Sweep,
    /// User 1 power in dB [default: 10].
    #[arg(long = "p1-db", conflicts_with = "p1")]
    pub p1_db: Option<Sweep>,
    #[arg(long)]
    pub p1: Option<Sweep>,
    /// User 2 power in dB [default: 10].
    #[arg(long = "p2-db", conflicts_with = "p2")]
    pub p2_db: Option<Sweep>,
    #[arg(long)]
    pub p2: Option<Sweep>,
    /// Decoding threshold of user 1.
    #[arg(long, default_value = "0.7")]
    pub gamma1: Sweep,
    /// Decoding threshold of user 2.
    #[arg(long, default_value = "0.5")]
    pub gamma2: Sweep,
    /// Jamming power in dB [default: 20].
    #[arg(long = "pj-db", conflicts_with = "pj")]
    pub pj_db: Option<Sweep>,
    #[arg(long)]
    pub pj: Option<Sweep>,
    #[arg(long, default_value = "0.6")]
    pub pjam: Sweep,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub jammer: JammerArgs,
    #[arg(long, default_value = "0.2")]
    pub lambda: Sweep,
    #[arg(long, default_value = "inf")]
    pub battery: CapacitySweep,
    /// Slots per replication.
    #[arg(long, default_value_t = 1_000_000)]
    pub slots: u64,
    /// Independent replications per parameter point.
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Leading fraction of slots discarded before measuring.
    #[arg(long, default_value_t = 0.1)]
    pub warmup: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// 10^5 draws and slots with widened gates (the default).
    #[arg(long, conflicts_with = "full")]
    pub quick: bool,
    /// 10^6 draws and 10^7 slots with the full gates.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(io::Error),
    Validation(Vec<String>),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Validation(names) => write!(f, "failed checks: {}", names.join(", ")),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Outage(a) => emit(&outage_table(a)?, &a.out),
        Command::ServiceLatency(a) => emit(&service_table(a)?, &a.out),
        Command::Optimize(a) => emit(&optimize_table(a)?, &a.out),
        Command::StabilityRegion(a) => emit(&region_table(a)?, &a.out),
        Command::Simulate(a) => emit(&simulate_table(a)?, &a.out),
        Command::Validate(a) => run_validate(a),
    }
}

fn emit(table: &Table, out: &OutputArgs) -> CliResult<()> {
    let write = |w: &mut dyn Write| match out.format {
        Format::Csv => table.write_csv(w),
        Format::Json => table.write_json(w),
    };
    match &out.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Power {
    lin: f64,
    db: f64,
}

fn powers(lin: &Option<Sweep>, db: &Option<Sweep>, default_db: f64) -> CliResult<Vec<Power>> {
    let out: Vec<Power> = match (lin, db) {
        (Some(l), _) => l.values().iter().map(|&v| Power { lin: v, db: linear_to_db(v) }).collect(),
        (None, Some(d)) => d.values().iter().map(|&v| Power { lin: db_to_linear(v), db: v }).collect(),
        (None, None) => vec![Power { lin: db_to_linear(default_db), db: default_db }],
    };
    if let Some(p) = out.iter().find(|p| !(p.lin >= 0.0) || !p.lin.is_finite()) {
        return Err(CliError::Usage(format!("power must be finite and >= 0, got {}", p.lin)));
    }
    Ok(out)
}

fn antennas(link: &LinkArgs) -> CliResult<Vec<AntennaConfig>> {
    let ntx = link.ntx.counts("ntx")?;
    let nrx = link.nrx.counts("nrx")?;
    let mut out = Vec::new();
    for &scheme in &link.scheme {
        match scheme {
            Scheme::Miso => {
                for &nt in &ntx {
                    out.push(AntennaConfig::miso(nt)?);
                }
            }
            Scheme::Simo => {
                for &nr in &nrx {
                    out.push(AntennaConfig::simo(nr)?);
                }
            }
            Scheme::Alamouti => {
                for &nt in &ntx {
                    for &nr in &nrx {
                        out.push(AntennaConfig::alamouti(nt, nr)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Antenna, transmit power, jamming power and rate for every sweep point.
struct LinkPoint {
    antenna: AntennaConfig,
    p: Power,
    pj: Power,
    rate: f64,
}

impl LinkPoint {
    fn budget(&self) -> CliResult<LinkBudget> {
        Ok(LinkBudget::new(self.p.lin, self.pj.lin, self.rate)?)
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.antenna.scheme().as_str().into(),
            self.antenna.n_t().into(),
            self.antenna.n_r().into(),
            self.p.db.into(),
            self.pj.db.into(),
            self.rate.into(),
        ]
    }
}

fn link_points(link: &LinkArgs) -> CliResult<Vec<LinkPoint>> {
    let ants = antennas(link)?;
    let ps = powers(&link.p, &link.p_db, 20.0)?;
    let pjs = powers(&link.pj, &link.pj_db, 20.0)?;
    let mut out = Vec::new();
    for &antenna in &ants {
        for &p in &ps {
            for &pj in &pjs {
                for &rate in link.rate.values() {
                    out.push(LinkPoint { antenna, p, pj, rate });
                }
            }
        }
    }
    Ok(out)
}

const LINK_COLUMNS: [&str; 6] = ["scheme", "n_t", "n_r", "P_dB", "PJ_dB", "R"];

fn columns(extra: &[&'static str]) -> Vec<&'static str> {
    LINK_COLUMNS.iter().copied().chain(extra.iter().copied()).collect()
}

fn collect_rows<T, F>(items: &[T], f: F) -> CliResult<Vec<Vec<Cell>>>
where
    T: Sync,
    F: Fn(&T) -> CliResult<Vec<Vec<Cell>>> + Sync + Send,
{
    let nested = items.par_iter().map(f).collect::<CliResult<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

pub fn outage_table(a: &OutageArgs) -> CliResult<Table> {
    let mut table = Table::new(&columns(&["eta", "p_out_jam", "p_out_nojam", "p_out_asymptotic"]));
    let etas: Vec<Option<f64>> = match &a.eta {
        Some(s) => s.values().iter().map(|&e| Some(e)).collect(),
        None => vec![None],
    };
    let points = link_points(&a.link)?;
    let rows = collect_rows(&points, |pt| {
        let budget = pt.budget()?;
        let jam = outage_with_jamming(&pt.antenna, &budget)?;
        let nojam = outage_without_jamming(&pt.antenna, pt.p.lin, pt.rate)?;
        etas.iter()
            .map(|eta| {
                let eta = eta.unwrap_or(pt.pj.lin / pt.p.lin);
                let asym = match PowerRatio::new(eta) {
                    Ok(r) => Cell::Num(asymptotic_outage(&pt.antenna, r, pt.rate)?),
                    Err(_) => Cell::Empty,
                };
                let mut row = pt.cells();
                row.extend([eta.into(), jam.into(), nojam.into(), asym]);
                Ok(row)
            })
            .collect()
    })?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn queue_cells(lambda: f64, mu: f64) -> CliResult<[Cell; 4]> {
    match (avg_queue_length(lambda, mu), avg_delay(lambda, mu), aaoi(lambda, mu)) {
        (Ok(q), Ok(d), Ok(a)) => Ok([q.into(), d.into(), a.into(), "ok".into()]),
        (Err(Error::Unstable { .. }), _, _) => Ok([Cell::Empty, Cell::Empty, Cell::Empty, "unstable".into()]),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => Err(e.into()),
    }
}

fn jammer_points(j: &JammerArgs, batteries: &CapacitySweep) -> Vec<(f64, f64, Capacity)> {
    let mut out = Vec::new();
    for &d in j.delta.values() {
        for &p in j.pjam.values() {
            for &b in &batteries.0 {
                out.push((d, p, b));
            }
        }
    }
    out
}

fn mode_name(m: ModeArg) -> &'static str {
    match m {
        ModeArg::CaseSplit => "case-split",
        ModeArg::Exact => "exact",
    }
}

pub fn service_table(a: &ServiceArgs) -> CliResult<Table> {
    let mut table = Table::new(&columns(&[
        "delta", "p_jam", "lambda", "B", "buffer_mode", "mu", "Qbar", "D", "AAoI", "status", "mu_inf", "Qbar_inf",
        "D_inf", "AAoI_inf", "status_inf",
    ]));
    let mode: BufferMode = a.jammer.buffer_mode.into();
    let jams = jammer_points(&a.jammer, &a.battery);
    let points = link_points(&a.link)?;
    let rows = collect_rows(&points, |pt| {
        let budget = pt.budget()?;
        let mut rows = Vec::new();
        for &(delta, p_jam, cap) in &jams {
            let ctx = ServiceContext::new(pt.antenna, budget, JammerEnergyModel::new(p_jam, delta, cap)?);
            let inf = ServiceContext { jammer: JammerEnergyModel::new(p_jam, delta, Capacity::Infinite)?, ..ctx };
            let mu = average_service_rate_with(&ctx, mode)?;
            let mu_inf = average_service_rate_with(&inf, mode)?;
            for &lambda in a.lambda.values() {
                let mut row = pt.cells();
                row.extend([delta.into(), p_jam.into(), lambda.into(), cap.to_string().into()]);
                row.push(mode_name(a.jammer.buffer_mode).into());
                row.push(mu.into());
                row.extend(queue_cells(lambda, mu)?);
                row.push(mu_inf.into());
                row.extend(queue_cells(lambda, mu_inf)?);
                rows.push(row);
            }
        }
        Ok(rows)
    })?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

pub fn optimize_table(a: &OptimizeArgs) -> CliResult<Table> {
    let mut table = Table::new(&columns(&[
        "PJ", "delta", "p_jam", "B", "mu", "d_th", "lambda_opt", "aaoi_opt", "delay_at_opt", "binding",
    ]));
    let mode: BufferMode = a.jammer.buffer_mode.into();
    let jams = jammer_points(&a.jammer, &a.battery);
    let dths: Vec<Option<f64>> = match &a.dth {
        Some(s) => s.values().iter().map(|&d| Some(d)).collect(),
        None => vec![None],
    };
    let points = link_points(&a.link)?;
    let rows = collect_rows(&points, |pt| {
        let budget = pt.budget()?;
        let mut rows = Vec::new();
        for &(delta, p_jam, cap) in &jams {
            let ctx = ServiceContext::new(pt.antenna, budget, JammerEnergyModel::new(p_jam, delta, cap)?);
            let mu = average_service_rate_with(&ctx, mode)?;
            for &dth in &dths {
                let result = match dth {
                    Some(d) => optimal_lambda_delay_constrained(mu, d),
                    None => optimal_lambda_unconstrained(mu),
                };
                let tail: [Cell; 4] = match result {
                    Ok(OptimizationResult { lambda_opt, aaoi_opt, delay_at_opt, binding }) => [
                        lambda_opt.into(),
                        aaoi_opt.into(),
                        delay_at_opt.into(),
                        binding.to_string().into(),
                    ],
                    Err(Error::Infeasible(_)) => [Cell::Empty, Cell::Empty, Cell::Empty, "infeasible".into()],
                    Err(e) => return Err(e.into()),
                };
                let mut row = pt.cells();
                row.extend([pt.pj.lin.into(), delta.into(), p_jam.into(), cap.to_string().into(), mu.into()]);
                row.push(dth.into());
                row.extend(tail);
                rows.push(row);
            }
        }
        Ok(rows)
    })?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

pub fn region_table(a: &RegionArgs) -> CliResult<Table> {
    let mut table = Table::new(&[
        "n_r", "P1_dB", "P2_dB", "gamma_1", "gamma_2", "PJ_dB", "p_jam", "region", "index", "lambda_1", "lambda_2",
        "p_1_1", "p_2_2", "p_1_12", "p_2_12", "degenerate",
    ]);
    let nrs = a.nrx.counts("nrx")?;
    let p1s = powers(&a.p1, &a.p1_db, 10.0)?;
    let p2s = powers(&a.p2, &a.p2_db, 10.0)?;
    let pjs = powers(&a.pj, &a.pj_db, 20.0)?;
    for &n_r in &nrs {
        for &p1 in &p1s {
            for &p2 in &p2s {
                for &pj in &pjs {
                    for combo in product(&[a.gamma1.values(), a.gamma2.values(), a.pjam.values()]) {
                        let (g1, g2, pr) = (combo[0], combo[1], combo[2]);
                        let cfg = BroadcastConfig::new(n_r, [p1.lin, p2.lin], [g1, g2], pj.lin, pr)?;
                        let region = stability_region(&cfg)?;
                        let pb = region.probabilities;
                        let sets = [
                            ("R1", region.region_1.vertices(), region.region_1.degenerate),
                            ("R2", region.region_2.vertices(), region.region_2.degenerate),
                            ("union", region.union_vertices(), region.degenerate()),
                        ];
                        for (name, verts, degenerate) in sets {
                            for (k, v) in verts.iter().enumerate() {
                                table.push(vec![
                                    n_r.into(),
                                    p1.db.into(),
                                    p2.db.into(),
                                    g1.into(),
                                    g2.into(),
                                    pj.db.into(),
                                    pr.into(),
                                    name.into(),
                                    (k as u64).into(),
                                    v[0].into(),
                                    v[1].into(),
                                    pb.single[0].into(),
                                    pb.single[1].into(),
                                    pb.both[0].into(),
                                    pb.both[1].into(),
                                    degenerate.into(),
                                ]);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(table)
}

const METRIC_COLUMNS: [&str; 12] = [
    "mu_hat",
    "mu_std_err",
    "mu_busy_hat",
    "delay_hat",
    "delay_tx_hat",
    "delay_queue_hat",
    "aaoi_hat",
    "qlen_hat",
    "jam_fraction",
    "empty_fraction",
    "deliveries",
    "unstable_warning",
];

fn report_cells(r: &MetricsReport) -> Vec<Cell> {
    vec![
        r.mu_hat.into(),
        r.mu_std_err.into(),
        r.mu_busy_hat.into(),
        r.delay_hat.into(),
        r.delay_tx_hat.into(),
        r.delay_queue_hat.into(),
        r.aaoi_hat.into(),
        r.qlen_hat.into(),
        r.jam_fraction.into(),
        r.empty_fraction.into(),
        r.deliveries.into(),
        r.unstable_warning.into(),
    ]
}

fn summary_cells(stats: [&MetricSummary; 9], pick: fn(&MetricSummary) -> f64, unstable: bool) -> Vec<Cell> {
    let v: Vec<f64> = stats.iter().map(|s| pick(s)).collect();
    vec![
        v[0].into(),
        Cell::Empty,
        v[1].into(),
        v[2].into(),
        v[3].into(),
        v[4].into(),
        v[5].into(),
        v[6].into(),
        v[7].into(),
        v[8].into(),
        Cell::Empty,
        unstable.into(),
    ]
}

pub fn simulate_table(a: &SimulateArgs) -> CliResult<Table> {
    let mut cols = columns(&[
        "delta", "p_jam", "lambda", "B", "slots", "warmup", "seed", "rep", "mu_theory", "D_theory", "AAoI_theory",
    ]);
    cols.extend(METRIC_COLUMNS);
    let mut table = Table::new(&cols);
    let mode: BufferMode = a.jammer.buffer_mode.into();
    let jams = jammer_points(&a.jammer, &a.battery);
    let points = link_points(&a.link)?;
    let rows = collect_rows(&points, |pt| {
        let budget = pt.budget()?;
        let mut rows = Vec::new();
        for &(delta, p_jam, cap) in &jams {
            let ctx = ServiceContext::new(pt.antenna, budget, JammerEnergyModel::new(p_jam, delta, cap)?);
            let mu = average_service_rate_with(&ctx, mode)?;
            for &lambda in a.lambda.values() {
                let cfg = SimConfig::new(ctx, TrafficModel::new(lambda)?, a.slots, a.seed)?.with_warmup(a.warmup)?;
                let (d_th, a_th) = match (avg_delay(lambda, mu), aaoi(lambda, mu)) {
                    (Ok(d), Ok(x)) => (Cell::Num(d), Cell::Num(x)),
                    _ => (Cell::Empty, Cell::Empty),
                };
                let head = |rep: Cell| {
                    let mut row = pt.cells();
                    row.extend([delta.into(), p_jam.into(), lambda.into(), cap.to_string().into()]);
                    row.extend([a.slots.into(), a.warmup.into(), a.seed.into(), rep]);
                    row.extend([mu.into(), d_th.clone(), a_th.clone()]);
                    row
                };
                if a.reps <= 1 {
                    let r = run_slots(&cfg)?;
                    let mut row = head(0u64.into());
                    row.extend(report_cells(&r));
                    rows.push(row);
                } else {
                    let s = run_replications(&cfg, a.reps)?;
                    for r in &s.reports {
                        let mut row = head(r.stream.into());
                        row.extend(report_cells(r));
                        rows.push(row);
                    }
                    let stats = [
                        &s.mu_hat,
                        &s.mu_busy_hat,
                        &s.delay_hat,
                        &s.delay_tx_hat,
                        &s.delay_queue_hat,
                        &s.aaoi_hat,
                        &s.qlen_hat,
                        &s.jam_fraction,
                        &s.empty_fraction,
                    ];
                    let unstable = s.reports.iter().any(|r| r.unstable_warning);
                    let mut row = head("mean".into());
                    row.extend(summary_cells(stats, |m| m.mean, unstable));
                    rows.push(row);
                    let mut row = head("std_err".into());
                    row.extend(summary_cells(stats, |m| m.std_err, unstable));
                    rows.push(row);
                }
            }
        }
        Ok(rows)
    })?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn run_validate(a: &ValidateArgs) -> CliResult<()> {
    let settings = if a.full { validate::Settings::full(a.seed) } else { validate::Settings::quick(a.seed) };
    let started = std::time::Instant::now();
    let checks = validate::run_all(&settings)?;
    let stdout = io::stdout();
    let mut w = stdout.lock();
    validate::print_report(&mut w, &settings, &checks, started.elapsed())?;
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed))
    }
}
