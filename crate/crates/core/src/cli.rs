//! Command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration or usage error,
//! 3 certificate rejected, 4 infeasible scheme, 5 quantizer overflow.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::numerics::induced_inf_norm;
use crate::observer::{derive_gains, make_bound_functions, verify_certificate};
use crate::quantizer::{DecoderGeometry, QuantizerConfig};
use crate::reachability::{InflationSchedule, ZeroNormPolicy};
use crate::schemes::{
    compare_schemes, min_feasible_levels, norm_contraction, norm_range_fixed_point,
    set_error_fixed_point, SchemeKind, TransitionMaps,
};
use crate::signals::SignalSpec;
use crate::sim::{
    check_invariants, run_closed_loop, steady_state_metrics, InvariantReport, RunOptions,
    SteadyState, DEFAULT_TAIL_FRACTION,
};
use crate::trace::{write_csv, write_packets};

/// Environment variable that sets the output directory.
pub const OUT_ENV: &str = "DYNQUANT_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_OVERFLOW: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "dynquant",
    version,
    about = "Dynamic quantization for remote state estimation"
)]
pub struct Cli {
    /// Experiment file; the bundled reference configuration when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for independent runs (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the observer certificate and print the derived constants.
    Verify,
    /// Evaluate both feasibility conditions and the smallest feasible N.
    Feasibility {
        /// Largest N tried when searching for the smallest feasible N.
        #[arg(long, default_value_t = 4096)]
        max_levels: u32,
    },
    /// Run the closed loop and write traces plus a summary.
    Simulate(RunArgs),
    /// Run both schemes and print the steady-state errors side by side.
    Compare(RunArgs),
    /// Feasibility and steady-state errors over a grid of T and N.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Set,
    Norm,
    Both,
}

impl SchemeArg {
    fn kinds(self) -> Vec<SchemeKind> {
        match self {
            SchemeArg::Set => vec![SchemeKind::SetBased],
            SchemeArg::Norm => vec![SchemeKind::NormBased],
            SchemeArg::Both => SchemeKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Update law; the configured `scheme` when omitted.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Single disturbance seed.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Comma-separated disturbance seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    /// Integration step; must divide the period.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulated time in seconds.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Also run with the half-span decoder and report it separately.
    #[arg(long)]
    pub paper_decoder: bool,
    /// Replace the configured disturbance with zero.
    #[arg(long)]
    pub no_disturbance: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated interval lengths T.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5])]
    pub periods: Vec<f64>,
    /// Comma-separated levels per axis N.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4, 6, 8, 16])]
    pub levels: Vec<u32>,
}

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Config(_) => EXIT_PARSE,
        Error::Infeasible { .. } => EXIT_INFEASIBLE,
        Error::Overflow { .. } => EXIT_OVERFLOW,
        _ => EXIT_OTHER,
    }
}

/// Parses `args`, runs the command and returns the exit code. Reports go
/// to `out`, errors to `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return if code == 0 { EXIT_OK } else { EXIT_PARSE };
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            ExperimentConfig::parse(&text)
        }
        None => Ok(ExperimentConfig::reference()),
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(cli.config.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    match &cli.command {
        Command::Verify => cmd_verify(&cfg, out),
        Command::Feasibility { max_levels } => cmd_feasibility(&cfg, *max_levels, out),
        Command::Simulate(args) => cmd_simulate(&cfg, args, &pool, out),
        Command::Compare(args) => cmd_compare(&cfg, args, &pool, out),
        Command::Sweep(args) => cmd_sweep(&cfg, args, &pool, out),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    format!(
        "[{}]",
        v.iter()
            .map(|x| format!("{x:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

pub fn cmd_verify(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<i32> {
    let e = &cfg.experiment;
    let report = verify_certificate(&e.plant, &e.cert)?;
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    writeln!(out, "certificate: {verdict}")?;
    writeln!(out, "  form: {}", report.form)?;
    writeln!(
        out,
        "  max eigenvalue: {:.6e} (tolerance {:e})",
        report.max_eigenvalue, report.tolerance
    )?;
    let gains = derive_gains(&e.cert, &e.plant)?;
    let bf = make_bound_functions(&e.cert, &gains, &e.plant, &e.bounds)?;
    writeln!(out, "  K = K_r = {}", fmt_vec(gains.k.as_slice()))?;
    writeln!(
        out,
        "  lambda_max(P) = {:.6}, lambda_min(P) = {:.6}",
        bf.lambda_max, bf.lambda_min
    )?;
    writeln!(out, "  lambda_e = {:.6}", bf.lambda_e)?;
    writeln!(
        out,
        "  beta_hat(r, s) = {:.6} * exp(-{:.6} s) * r",
        bf.decay_gain,
        bf.lambda_e / 2.0
    )?;
    writeln!(out, "  gamma_hat(r) = {:.6} * r", bf.disturbance_gain)?;
    writeln!(
        out,
        "  gamma_r(s) = {:.6} * s",
        bf.disturbance_gain * bf.reconstruction_input_gain
    )?;
    writeln!(
        out,
        "  beta_d(0) = {:.6}, beta_d(inf) = {:.6}",
        bf.local_error_envelope(0.0),
        bf.gamma_hat(bf.d_b)
    )?;
    let rank = e.plant.observability_rank();
    let n = e.plant.state_dim();
    writeln!(
        out,
        "  observability rank {rank}/{n}{}",
        if rank < n {
            " (warning: not observable)"
        } else {
            ""
        }
    )?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
}

pub fn cmd_feasibility(
    cfg: &ExperimentConfig,
    max_levels: u32,
    out: &mut dyn Write,
) -> Result<i32> {
    let e = &cfg.experiment;
    let a = &e.plant.a;
    let levels = e.quantizer.levels();
    let (set, norm) = compare_schemes(a, e.period, levels)?;
    writeln!(out, "T = {}, N = {levels}", e.period)?;
    for r in [&set, &norm] {
        writeln!(
            out,
            "  {:<4} lhs = {:.6}  {}  (margin {:.6})",
            r.scheme.short_name(),
            r.lhs,
            if r.feasible { "feasible" } else { "infeasible" },
            r.margin
        )?;
    }
    let dominance = set.lhs <= norm.lhs + 1e-8;
    writeln!(
        out,
        "  set lhs <= norm lhs: {}",
        if dominance { "yes" } else { "NO" }
    )?;
    for scheme in SchemeKind::ALL {
        match min_feasible_levels(scheme, a, e.period, max_levels)? {
            Some(m) => writeln!(out, "  smallest feasible N ({scheme}): {m}")?,
            None => writeln!(
                out,
                "  smallest feasible N ({scheme}): none up to {max_levels}"
            )?,
        }
    }

    let gains = derive_gains(&e.cert, &e.plant)?;
    let bf = make_bound_functions(&e.cert, &gains, &e.plant, &e.bounds)?;
    let schedule = InflationSchedule::new(
        &e.plant,
        &gains,
        &e.bounds,
        bf,
        e.period,
        ZeroNormPolicy::Reject,
    )?;
    if let (Ok(b0), Ok(binf)) = (schedule.beta_ue(0), schedule.beta_ue_limit()) {
        writeln!(
            out,
            "  beta_ue^0 = {b0:.6}, beta_ue^inf = {binf:.6}, beta_ue_bar = {:.6}",
            schedule.beta_ue_bar()
        )?;
        if set.feasible {
            let maps = TransitionMaps::new(a, e.period)?;
            let eq = set_error_fixed_point(&maps.lambda_bar, levels, binf)?;
            writeln!(
                out,
                "  set: limit of max quantization error = {}",
                fmt_vec(&eq)
            )?;
        }
        if let Some(l) = norm_range_fixed_point(induced_inf_norm(a), e.period, levels, binf) {
            writeln!(
                out,
                "  norm: limit of range = {l:.6}, max quantization error = {:.6}",
                l / levels as f64
            )?;
        }
    }
    let c = norm_contraction(induced_inf_norm(a), e.period, levels);
    writeln!(
        out,
        "  norm contraction: e^(|A|T)/N = {:.6}, |A|T/N = {:.6}",
        c.update_ratio, c.linearized_ratio
    )?;

    let selected_ok = cfg.schemes.iter().all(|s| match s {
        SchemeKind::SetBased => set.feasible,
        SchemeKind::NormBased => norm.feasible,
    });
    Ok(if selected_ok {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    })
}

struct Plan {
    schemes: Vec<SchemeKind>,
    seeds: Vec<u64>,
    horizon: f64,
    dt: f64,
    out_dir: PathBuf,
    signals: SignalSpec,
    decoders: Vec<DecoderGeometry>,
}

fn plan(cfg: &ExperimentConfig, args: &RunArgs, force_both: bool) -> Plan {
    let schemes = match (force_both, args.scheme) {
        (true, _) => SchemeKind::ALL.to_vec(),
        (false, Some(s)) => s.kinds(),
        (false, None) => cfg.schemes.clone(),
    };
    let seeds = match (&args.seed, &args.seeds) {
        (Some(s), _) => vec![*s],
        (None, Some(list)) => list.clone(),
        (None, None) => cfg.seeds.clone(),
    };
    let signals = if args.no_disturbance {
        cfg.signals.without_disturbance()
    } else {
        cfg.signals.clone()
    };
    let mut decoders = vec![DecoderGeometry::Centroid];
    if args.paper_decoder {
        decoders.push(DecoderGeometry::HalfSpan);
    }
    Plan {
        schemes,
        seeds,
        horizon: args.horizon.unwrap_or(cfg.horizon),
        dt: args.dt.unwrap_or(cfg.dt),
        out_dir: args.out.clone().unwrap_or_else(|| cfg.out_dir.clone()),
        signals,
        decoders,
    }
}

#[derive(Debug, Clone)]
struct RunResult {
    scheme: SchemeKind,
    seed: u64,
    decoder: DecoderGeometry,
    metrics: SteadyState,
    invariants: InvariantReport,
    transmissions: usize,
}

fn decoder_tag(d: DecoderGeometry) -> &'static str {
    match d {
        DecoderGeometry::Centroid => "",
        DecoderGeometry::HalfSpan => "_halfspan",
    }
}

fn run_plan(cfg: &ExperimentConfig, plan: &Plan, write_traces: bool) -> Result<Vec<RunResult>> {
    let jobs: Vec<(DecoderGeometry, SchemeKind, u64)> = plan
        .decoders
        .iter()
        .flat_map(|&d| {
            plan.schemes
                .iter()
                .flat_map(move |&s| plan.seeds.iter().map(move |&seed| (d, s, seed)))
        })
        .collect();
    if write_traces {
        fs::create_dir_all(&plan.out_dir)?;
    }
    jobs.par_iter()
        .map(|&(decoder, scheme, seed)| {
            let mut opts = RunOptions::new(scheme, plan.horizon, plan.dt, seed);
            opts.decoder = decoder;
            let trace = run_closed_loop(&cfg.experiment, &plan.signals, &opts)?;
            if write_traces {
                let stem = format!("{scheme}_seed{seed}{}", decoder_tag(decoder));
                let mut w = BufWriter::new(File::create(plan.out_dir.join(format!("{stem}.csv")))?);
                write_csv(&trace, &mut w)?;
                w.flush()?;
                let mut p = BufWriter::new(File::create(
                    plan.out_dir.join(format!("{stem}.packets.bin")),
                )?);
                write_packets(&trace, &mut p)?;
                p.flush()?;
            }
            Ok(RunResult {
                scheme,
                seed,
                decoder,
                metrics: steady_state_metrics(&trace, DEFAULT_TAIL_FRACTION)?,
                invariants: check_invariants(&trace),
                transmissions: trace.transmissions.len().saturating_sub(1),
            })
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn aggregate(values: Vec<f64>) -> (f64, f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, median(values), max)
}

fn invariant_summary(r: &InvariantReport) -> String {
    if r.ok() {
        return "ok".into();
    }
    let mut parts = Vec::new();
    for (name, v) in [
        ("containment", r.containment),
        ("local", r.local_error),
        ("quantization", r.quantization_error),
        ("reconstruction", r.reconstruction_error),
    ] {
        if !v.ok() {
            parts.push(format!("{name}:{}", v.count));
        }
    }
    parts.join(" ")
}

pub fn cmd_simulate(
    cfg: &ExperimentConfig,
    args: &RunArgs,
    pool: &ThreadPool,
    out: &mut dyn Write,
) -> Result<i32> {
    let plan = plan(cfg, args, false);
    let results = pool.install(|| run_plan(cfg, &plan, true))?;

    let mut summary = BufWriter::new(File::create(plan.out_dir.join("summary.csv"))?);
    writeln!(
        summary,
        "scheme,decoder,seed,transmissions,eq_inf,er_inf,eq_tail_mean,er_tail_mean,invariants"
    )?;
    writeln!(
        out,
        "{:<5} {:<10} {:>6} {:>10} {:>10}  invariants",
        "scheme", "decoder", "seed", "e_q^inf", "e_r^inf"
    )?;
    for r in &results {
        let dec = if r.decoder == DecoderGeometry::Centroid {
            "centroid"
        } else {
            "half-span"
        };
        writeln!(
            summary,
            "{},{dec},{},{},{},{},{},{},{}",
            r.scheme,
            r.seed,
            r.transmissions,
            r.metrics.eq_inf,
            r.metrics.er_inf,
            r.metrics.eq_tail_mean,
            r.metrics.er_tail_mean,
            invariant_summary(&r.invariants)
        )?;
        writeln!(
            out,
            "{:<6} {:<10} {:>6} {:>10.6} {:>10.6}  {}",
            r.scheme.to_string(),
            dec,
            r.seed,
            r.metrics.eq_inf,
            r.metrics.er_inf,
            invariant_summary(&r.invariants)
        )?;
    }
    summary.flush()?;
    for &decoder in &plan.decoders {
        for &scheme in &plan.schemes {
            let rs: Vec<&RunResult> = results
                .iter()
                .filter(|r| r.scheme == scheme && r.decoder == decoder)
                .collect();
            let (qmin, qmed, qmax) = aggregate(rs.iter().map(|r| r.metrics.eq_inf).collect());
            let (rmin, rmed, rmax) = aggregate(rs.iter().map(|r| r.metrics.er_inf).collect());
            writeln!(
                out,
                "{scheme}{}: e_q^inf min/median/max {qmin:.6}/{qmed:.6}/{qmax:.6}, e_r^inf {rmin:.6}/{rmed:.6}/{rmax:.6}",
                decoder_tag(decoder)
            )?;
        }
    }
    writeln!(out, "traces written to {}", plan.out_dir.display())?;
    let all_ok = results
        .iter()
        .filter(|r| r.decoder == DecoderGeometry::Centroid)
        .all(|r| r.invariants.ok());
    Ok(if all_ok { EXIT_OK } else { EXIT_OTHER })
}

pub fn cmd_compare(
    cfg: &ExperimentConfig,
    args: &RunArgs,
    pool: &ThreadPool,
    out: &mut dyn Write,
) -> Result<i32> {
    let plan = plan(cfg, args, true);
    let results = pool.install(|| run_plan(cfg, &plan, false))?;
    let pick = |scheme, decoder, f: fn(&SteadyState) -> f64| -> Vec<f64> {
        results
            .iter()
            .filter(|r| r.scheme == scheme && r.decoder == decoder)
            .map(|r| f(&r.metrics))
            .collect()
    };
    for &decoder in &plan.decoders {
        let label = if decoder == DecoderGeometry::Centroid {
            "centroid decoder"
        } else {
            "half-span decoder"
        };
        writeln!(out, "{label}, median over seeds {:?}", plan.seeds)?;
        writeln!(out, "  {:<34} {:>10} {:>10}", "", "set", "norm")?;
        type Metric = fn(&SteadyState) -> f64;
        let rows: [(&str, Metric); 2] = [
            ("steady-state reconstruction error", |m| m.er_inf),
            ("steady-state quantization error", |m| m.eq_inf),
        ];
        for (name, f) in rows {
            writeln!(
                out,
                "  {name:<34} {:>10.4} {:>10.4}",
                median(pick(SchemeKind::SetBased, decoder, f)),
                median(pick(SchemeKind::NormBased, decoder, f))
            )?;
        }
        let mut ordered = true;
        for &seed in &plan.seeds {
            let get = |s| {
                results
                    .iter()
                    .find(|r| r.scheme == s && r.seed == seed && r.decoder == decoder)
                    .map(|r| r.metrics)
                    .expect("every job ran")
            };
            let (set, norm) = (get(SchemeKind::SetBased), get(SchemeKind::NormBased));
            ordered &= set.eq_inf < norm.eq_inf && set.er_inf < norm.er_inf;
        }
        writeln!(
            out,
            "  set below norm for every seed: {}",
            if ordered { "yes" } else { "no" }
        )?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_sweep(
    cfg: &ExperimentConfig,
    args: &SweepArgs,
    pool: &ThreadPool,
    out: &mut dyn Write,
) -> Result<i32> {
    let plan = plan(cfg, &args.run, true);
    let seed = plan.seeds.first().copied().unwrap_or(0);
    let n = cfg.experiment.plant.state_dim();
    let cells: Vec<(f64, u32)> = args
        .periods
        .iter()
        .flat_map(|&t| args.levels.iter().map(move |&l| (t, l)))
        .collect();
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(period, levels)| {
                let (set, norm) = compare_schemes(&cfg.experiment.plant.a, period, levels)?;
                let mut exp = cfg.experiment.clone();
                exp.period = period;
                exp.quantizer = QuantizerConfig::from_levels(n, levels)?;
                let metric = |scheme: SchemeKind, feasible: bool| -> Result<Option<SteadyState>> {
                    if !feasible {
                        return Ok(None);
                    }
                    let trace = run_closed_loop(
                        &exp,
                        &plan.signals,
                        &RunOptions::new(scheme, plan.horizon, plan.dt, seed),
                    )?;
                    steady_state_metrics(&trace, DEFAULT_TAIL_FRACTION).map(Some)
                };
                Ok(SweepRow {
                    period,
                    levels,
                    set_lhs: set.lhs,
                    norm_lhs: norm.lhs,
                    set: metric(SchemeKind::SetBased, set.feasible)?,
                    norm: metric(SchemeKind::NormBased, norm.feasible)?,
                    set_feasible: set.feasible,
                    norm_feasible: norm.feasible,
                })
            })
            .collect::<Result<_>>()
    })?;

    fs::create_dir_all(&plan.out_dir)?;
    let path = plan.out_dir.join("sweep.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "T,N,lhs_set,feasible_set,lhs_norm,feasible_norm,eq_inf_set,er_inf_set,eq_inf_norm,er_inf_norm")?;
    let opt = |m: Option<SteadyState>, f: fn(&SteadyState) -> f64| {
        m.as_ref().map(f).map_or(String::new(), |v| v.to_string())
    };
    let mut gaps = 0;
    for r in &rows {
        if r.norm_feasible && !r.set_feasible {
            gaps += 1;
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.period,
            r.levels,
            r.set_lhs,
            r.set_feasible,
            r.norm_lhs,
            r.norm_feasible,
            opt(r.set, |m| m.eq_inf),
            opt(r.set, |m| m.er_inf),
            opt(r.norm, |m| m.eq_inf),
            opt(r.norm, |m| m.er_inf),
        )?;
    }
    w.flush()?;
    let set_only = rows
        .iter()
        .filter(|r| r.set_feasible && !r.norm_feasible)
        .count();
    writeln!(
        out,
        "{} cells, {} feasible for set only, {} where norm is feasible and set is not",
        rows.len(),
        set_only,
        gaps
    )?;
    writeln!(out, "grid written to {}", path.display())?;
    Ok(EXIT_OK)
}

struct SweepRow {
    period: f64,
    levels: u32,
    set_lhs: f64,
    norm_lhs: f64,
    set_feasible: bool,
    norm_feasible: bool,
    set: Option<SteadyState>,
    norm: Option<SteadyState>,
}
