#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! The `kamlab` command line: argument parsing, configuration merging and
//! dispatch to the simulation library.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors (nothing
//! is written), 2 for numeric or I/O failures.

use std::ffi::OsString;
use std::fmt;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

pub use kamlab_core as core;

use kamlab_core::averaging::{
    highfreq_drift_experiment, lowfreq_twist_experiment, DriftConfig, DriftSampling, ScalingFit,
    TwistConfig,
};
use kamlab_core::elliptic::{complete_elliptic_k, jacobi, EllipticModulus};
use kamlab_core::integrator::{
    integrate, ObserverSet, StepMode, StepPolicy, DEFAULT_ESCAPE_THRESHOLD,
};
use kamlab_core::model::{frozen_energy, ForcingSpec, FourierShape, PhaseState};
use kamlab_core::poincare::{angle_section, stroboscopic};
use kamlab_core::sweep::{run_grid, ClosenessMetric};
use kamlab_core::KamError;

pub mod config;
pub mod output;
pub mod svg;

use output::{
    fmt_f64, write_atomic, CrossingRow, DriftRow, EllipticRow, IcRow, OrbitRow, Provenance, Record,
    StrobeRow, SweepRow, Table, TwistRow,
};

/// Cells classified by `kamlab sweep` when neither flags nor config name any.
pub const DEFAULT_CELLS: [(f64, f64); 10] = [
    (0.8, 0.05),
    (0.8, 0.3),
    (0.8, 14.0),
    (0.8, 0.8),
    (0.9, 0.4),
    (0.95, 14.0),
    (1.2, 14.0),
    (2.0, 16.0),
    (2.0, 20.0),
    (5.0, 18.0),
];

pub const DEFAULT_EPS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
pub const DEFAULT_OMEGAS: [f64; 4] = [50.0, 100.0, 200.0, 400.0];

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<KamError> for CliError {
    fn from(e: KamError) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kamlab",
    version,
    about = "Forced quartic oscillator experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate sn, cn, dn on a uniform grid
    Elliptic(EllipticArgs),
    /// Integrate one orbit and write every accepted state
    Integrate(IntegrateArgs),
    /// Classify (mu, omega) cells by Monte-Carlo over initial conditions
    Sweep(SweepArgs),
    /// Stroboscopic samples at multiples of the forcing period
    Poincare(SectionArgs),
    /// Crossings of {y = 0, x > 0}
    Section(SectionArgs),
    /// Per-loop adiabatic-action increments against slow forcing frequency
    Twist(TwistArgs),
    /// Unforced-action deviation against fast forcing frequency
    Drift(DriftArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (falls back to KAMLAB_THREADS, then all cores)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StepArgs {
    /// Base step size
    #[arg(long)]
    pub h0: Option<f64>,
    /// Use the fixed step h0 instead of the adaptive rule
    #[arg(long)]
    pub fixed_step: bool,
}

#[derive(Debug, Args)]
pub struct EllipticArgs {
    #[arg(long)]
    pub table: bool,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub k: f64,
    #[arg(long, default_value_t = 0.0)]
    pub u_min: f64,
    /// Defaults to the real period 4K(k)
    #[arg(long)]
    pub u_max: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted for uniformity; the table is computed serially
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub step: StepArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Keep every n-th accepted state
    #[arg(long)]
    pub stride: Option<usize>,
    /// Also render an (x, y) scatter
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub step: StepArgs,
    /// Cells as mu:omega pairs, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_cell, allow_negative_numbers = true)]
    pub cells: Option<Vec<(f64, f64)>>,
    #[arg(long)]
    pub n_ics: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap on the per-orbit integration time
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Relative deviation separating Close from Drifted orbits
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<ClosenessMetric>,
}

#[derive(Debug, Args)]
pub struct SectionArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub step: StepArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// CSV of initial conditions with columns x,y[,t]
    #[arg(long, conflicts_with_all = ["x0", "y0"])]
    pub ics: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    /// Samples per initial condition
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TwistArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub step: StepArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DriftArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub step: StepArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub omegas: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    #[arg(long)]
    pub window: Option<f64>,
    /// every | strobe
    #[arg(long, value_parser = parse_sampling)]
    pub sampling: Option<DriftSampling>,
}

fn parse_cell(s: &str) -> Result<(f64, f64), String> {
    let (mu, omega) = s
        .split_once(':')
        .ok_or_else(|| format!("cell '{s}' is not mu:omega"))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| format!("cell '{s}': {e}"))
    };
    Ok((num(mu)?, num(omega)?))
}

fn parse_metric(s: &str) -> Result<ClosenessMetric, String> {
    match s {
        "amplitude" => Ok(ClosenessMetric::Amplitude),
        "energy" => Ok(ClosenessMetric::Energy),
        _ => Err(format!("unknown metric '{s}' (amplitude | energy)")),
    }
}

fn parse_sampling(s: &str) -> Result<DriftSampling, String> {
    match s {
        "every" => Ok(DriftSampling::Every),
        "strobe" => Ok(DriftSampling::Strobe),
        _ => Err(format!("unknown sampling '{s}' (every | strobe)")),
    }
}

/// Parse `args` (including the program name) and run. Returns the process
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kamlab: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Elliptic(a) => cmd_elliptic(a),
        Command::Integrate(a) => cmd_integrate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Poincare(a) => cmd_poincare(a),
        Command::Section(a) => cmd_section(a),
        Command::Twist(a) => cmd_twist(a),
        Command::Drift(a) => cmd_drift(a),
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("KAMLAB_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(v.trim().parse::<usize>().map_err(|_| {
                CliError::Config(format!("KAMLAB_THREADS='{v}' is not a thread count"))
            })?),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Config("thread count must be >= 1".into()));
    }
    Ok(n)
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn resolve_policy(
    base: Option<StepPolicy>,
    step: &StepArgs,
    default: StepPolicy,
) -> Result<StepPolicy, CliError> {
    let mut p = base.unwrap_or(default);
    if let Some(h) = step.h0 {
        p.h0 = h;
        if h.is_finite() && h > 0.0 {
            p.h_min = p.h_min.min(h);
            p.h_max = p.h_max.max(h);
        }
    }
    if step.fixed_step {
        p.mode = StepMode::Fixed;
        p.h_min = p.h0;
        p.h_max = p.h0;
    }
    p.validate()?;
    Ok(p)
}

fn required(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("--{name} is required (flag or config)")))
}

fn forcing(
    mu: Option<f64>,
    omega: Option<f64>,
    shape: Option<FourierShape>,
) -> Result<ForcingSpec, CliError> {
    Ok(ForcingSpec::with_shape(
        required(mu, "mu")?,
        required(omega, "omega")?,
        shape.unwrap_or_default(),
    )?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes())
            .map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() != ErrorKind::BrokenPipe => {
                    Err(CliError::Io(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn fit_lines(fit: &Option<ScalingFit>) -> Vec<String> {
    match fit {
        Some(f) => vec![format!(
            "fit slope={} intercept={} r_squared={} points={}",
            fmt_f64(f.slope),
            fmt_f64(f.intercept),
            fmt_f64(f.r_squared),
            f.points.len()
        )],
        None => vec!["fit degenerate".to_string()],
    }
}

fn config_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config values serialise")
}

fn cmd_elliptic(a: EllipticArgs) -> Result<i32, CliError> {
    if !a.table {
        return Err(CliError::Config("elliptic needs --table".into()));
    }
    thread_count(a.threads)?;
    let k = EllipticModulus::new(a.k)?;
    let u_max = a.u_max.unwrap_or_else(|| 4.0 * complete_elliptic_k(k));
    if a.n == 0 || !a.u_min.is_finite() || !u_max.is_finite() {
        return Err(CliError::Config(
            "need n >= 1 and finite u-min, u-max".into(),
        ));
    }
    let prov = Provenance {
        command: "elliptic",
        seed: None,
        config: json!({"k": a.k, "u_min": a.u_min, "u_max": u_max, "n": a.n}),
    };
    let mut table = Table::new(EllipticRow::HEADER, &prov);
    for i in 0..a.n {
        let u = if a.n == 1 {
            a.u_min
        } else {
            a.u_min + (u_max - a.u_min) * i as f64 / (a.n - 1) as f64
        };
        let j = jacobi(u, k)?;
        table.push(&EllipticRow {
            u,
            sn: j.sn,
            cn: j.cn,
            dn: j.dn,
        });
    }
    emit(a.out.as_deref(), &table.render())?;
    Ok(0)
}

fn write_svg(
    path: Option<&Path>,
    points: &[(f64, f64)],
    xl: &str,
    yl: &str,
) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, svg::scatter(points, xl, yl).as_bytes())
            .map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn cmd_integrate(a: IntegrateArgs) -> Result<i32, CliError> {
    let file = config::load_run(a.common.config.as_deref())?;
    let threads = thread_count(a.common.threads)?;
    let f = forcing(a.mu.or(file.mu), a.omega.or(file.omega), file.shape)?;
    let policy = resolve_policy(file.policy, &a.step, StepPolicy::default())?;
    let ic = PhaseState::new(
        required(a.x0.or(file.x0), "x0")?,
        required(a.y0.or(file.y0), "y0")?,
        0.0,
    )?;
    let t_max = required(a.t_max.or(file.t_max), "t-max")?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(CliError::Config(format!("t-max must be > 0, got {t_max}")));
    }
    let stride = a.stride.or(file.stride).unwrap_or(1);
    if stride == 0 {
        return Err(CliError::Config("stride must be >= 1".into()));
    }
    let prov = Provenance {
        command: "integrate",
        seed: None,
        config: json!({
            "forcing": config_json(&f), "policy": config_json(&policy),
            "x0": ic.x, "y0": ic.y, "t_max": t_max, "stride": stride,
        }),
    };
    let obs = ObserverSet::bounds_only(DEFAULT_ESCAPE_THRESHOLD).with_trajectory(stride);
    let run = in_pool(threads, || integrate(&ic, &f, &policy, t_max, &obs))??;
    let mut table = Table::new(OrbitRow::HEADER, &prov);
    for s in &run.trajectory {
        table.push(&OrbitRow {
            t: s.t,
            x: s.x,
            y: s.y,
            e_frozen: frozen_energy(s.x, s.y, f.a_at(s.t)),
        });
    }
    if let Some(t) = run.escape_time {
        table.trailer.push(format!("escaped t={}", fmt_f64(t)));
    }
    emit(a.common.out.as_deref(), &table.render())?;
    let pts: Vec<(f64, f64)> = run.trajectory.iter().map(|s| (s.x, s.y)).collect();
    write_svg(a.svg.as_deref(), &pts, "x", "y")?;
    Ok(0)
}

fn cmd_sweep(a: SweepArgs) -> Result<i32, CliError> {
    let file = config::load_sweep(a.common.config.as_deref())?;
    let threads = thread_count(a.common.threads)?;
    let mut cfg = file.sweep;
    if let Some(n) = a.n_ics {
        cfg.n_ics = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.max_time {
        cfg.horizon.max_time = t;
    }
    if let Some(d) = a.delta {
        cfg.closeness_delta = d;
    }
    if let Some(m) = a.metric {
        cfg.closeness_metric = m;
    }
    cfg.validate()?;
    let policy = resolve_policy(file.policy, &a.step, StepPolicy::default())?;
    let cells = a
        .cells
        .or(file.cells)
        .unwrap_or_else(|| DEFAULT_CELLS.to_vec());
    for &(mu, omega) in &cells {
        cfg.forcing(mu, omega)?;
    }
    let prov = Provenance {
        command: "sweep",
        seed: Some(cfg.seed),
        config: json!({"sweep": config_json(&cfg), "policy": config_json(&policy), "cells": cells}),
    };
    let report = in_pool(threads, || run_grid(&cells, &cfg, &policy))??;

    let mut table = Table::new(SweepRow::HEADER, &prov);
    let mut failed = false;
    for c in &report.cells {
        let class = match c.verdict {
            Some(v) => v.as_str().to_string(),
            None => {
                failed = true;
                "Failed".to_string()
            }
        };
        table.push(&SweepRow {
            mu: c.mu,
            omega: c.omega,
            class,
            frac_close: c.counts.frac_close(),
            frac_drifted: c.counts.frac_drifted(),
            n_escaped: c.counts.escaped,
            n_failed: c.counts.failed,
            seed: report.seed,
        });
    }
    emit(a.common.out.as_deref(), &table.render())?;
    if a.common.out.is_some() {
        for row in &table.rows {
            println!("{}", row[..3].join(" "));
        }
    }
    if failed {
        eprintln!("kamlab: some cells had more than 1% numeric failures");
        return Ok(2);
    }
    Ok(0)
}

struct SectionSetup {
    f: ForcingSpec,
    policy: StepPolicy,
    ics: Vec<PhaseState>,
    n: usize,
    threads: Option<usize>,
    prov: Provenance,
}

fn section_setup(
    a: &SectionArgs,
    command: &'static str,
    default_n: usize,
) -> Result<SectionSetup, CliError> {
    let file = config::load_run(a.common.config.as_deref())?;
    let threads = thread_count(a.common.threads)?;
    let f = forcing(a.mu.or(file.mu), a.omega.or(file.omega), file.shape)?;
    let policy = resolve_policy(file.policy, &a.step, StepPolicy::default())?;
    let ics = match &a.ics {
        Some(p) => {
            let rows: Vec<IcRow> = output::read_rows(p).map_err(CliError::Config)?;
            rows.iter()
                .map(|r| PhaseState::new(r.x, r.y, r.t))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => vec![PhaseState::new(
            required(a.x0.or(file.x0), "x0")?,
            required(a.y0.or(file.y0), "y0")?,
            0.0,
        )?],
    };
    let n = a.n.or(file.n).unwrap_or(default_n);
    if n == 0 {
        return Err(CliError::Config("n must be >= 1".into()));
    }
    if command == "section" && ics.iter().any(|s| s.x == 0.0 && s.y == 0.0) {
        return Err(CliError::Config(
            "the origin never crosses the section".into(),
        ));
    }
    let ic_list: Vec<[f64; 3]> = ics.iter().map(|s| [s.x, s.y, s.t]).collect();
    let prov = Provenance {
        command,
        seed: None,
        config: json!({
            "forcing": config_json(&f), "policy": config_json(&policy), "ics": ic_list, "n": n,
        }),
    };
    Ok(SectionSetup {
        f,
        policy,
        ics,
        n,
        threads,
        prov,
    })
}

fn cmd_poincare(a: SectionArgs) -> Result<i32, CliError> {
    let s = section_setup(&a, "poincare", 100)?;
    let runs = in_pool(s.threads, || {
        s.ics
            .par_iter()
            .map(|ic| stroboscopic(ic, &s.f, s.n, &s.policy))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let mut table = Table::new(StrobeRow::HEADER, &s.prov);
    let mut pts = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        for (k, p) in run.samples.iter().enumerate() {
            table.push(&StrobeRow {
                ic_index: i,
                k: k + 1,
                x: p.x,
                y: p.y,
            });
            pts.push((p.x, p.y));
        }
        if let Some(t) = run.escape_time {
            table
                .trailer
                .push(format!("ic {i} escaped t={}", fmt_f64(t)));
        }
    }
    emit(a.common.out.as_deref(), &table.render())?;
    write_svg(a.svg.as_deref(), &pts, "x", "y")?;
    Ok(0)
}

fn cmd_section(a: SectionArgs) -> Result<i32, CliError> {
    let s = section_setup(&a, "section", 100)?;
    let runs = in_pool(s.threads, || {
        s.ics
            .par_iter()
            .map(|ic| angle_section(ic, &s.f, s.n, &s.policy))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let mut table = Table::new(CrossingRow::HEADER, &s.prov);
    let mut pts = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        for (k, r) in run.records.iter().enumerate() {
            table.push(&CrossingRow {
                ic_index: i,
                k: k + 1,
                t: r.t,
                x: r.x,
                e_frozen: r.e_frozen,
            });
            pts.push((r.t, r.e_frozen));
        }
        if let Some(t) = run.escape_time {
            table
                .trailer
                .push(format!("ic {i} escaped t={}", fmt_f64(t)));
        } else if !run.complete {
            table
                .trailer
                .push(format!("ic {i} crossings={} of {}", run.records.len(), s.n));
        }
    }
    emit(a.common.out.as_deref(), &table.render())?;
    write_svg(a.svg.as_deref(), &pts, "t", "E_frozen")?;
    Ok(0)
}

fn cmd_twist(a: TwistArgs) -> Result<i32, CliError> {
    let file = config::load_run(a.common.config.as_deref())?;
    let threads = thread_count(a.common.threads)?;
    let mut cfg = TwistConfig::default();
    cfg.policy = resolve_policy(file.policy, &a.step, cfg.policy)?;
    let mu = a.mu.or(file.mu).unwrap_or(0.5);
    let eps = a.eps.or(file.eps).unwrap_or_else(|| DEFAULT_EPS.to_vec());
    let ic = PhaseState::new(
        a.x0.or(file.x0).unwrap_or(1.0),
        a.y0.or(file.y0).unwrap_or(0.0),
        0.0,
    )?;
    let prov = Provenance {
        command: "twist",
        seed: None,
        config: json!({"mu": mu, "eps": eps, "x0": ic.x, "y0": ic.y, "twist": config_json(&cfg)}),
    };
    let report = in_pool(threads, || lowfreq_twist_experiment(mu, &eps, &ic, &cfg))??;
    let mut table = Table::new(TwistRow::HEADER, &prov);
    for p in &report.points {
        table.push(&TwistRow {
            eps: p.eps,
            median_dj: p.median_dj,
            n_loops: p.n_loops,
        });
        if p.escaped {
            table
                .trailer
                .push(format!("eps {} escaped", fmt_f64(p.eps)));
        }
    }
    table.trailer.extend(fit_lines(&report.fit));
    emit(a.common.out.as_deref(), &table.render())?;
    if a.common.out.is_some() {
        fit_lines(&report.fit).iter().for_each(|l| println!("{l}"));
    }
    Ok(0)
}

fn cmd_drift(a: DriftArgs) -> Result<i32, CliError> {
    let file = config::load_run(a.common.config.as_deref())?;
    let threads = thread_count(a.common.threads)?;
    let mut cfg = DriftConfig::default();
    cfg.policy = resolve_policy(file.policy, &a.step, cfg.policy)?;
    if let Some(w) = a.window.or(file.window) {
        cfg.window = w;
    }
    if let Some(s) = a.sampling.or(file.sampling) {
        cfg.sampling = s;
    }
    let mu = a.mu.or(file.mu).unwrap_or(0.8);
    let omegas = a
        .omegas
        .or(file.omegas)
        .unwrap_or_else(|| DEFAULT_OMEGAS.to_vec());
    let ic = PhaseState::new(
        a.x0.or(file.x0).unwrap_or(1.0),
        a.y0.or(file.y0).unwrap_or(1.0),
        0.0,
    )?;
    let prov = Provenance {
        command: "drift",
        seed: None,
        config: json!({"mu": mu, "omegas": omegas, "x0": ic.x, "y0": ic.y, "drift": config_json(&cfg)}),
    };
    let report = in_pool(threads, || {
        highfreq_drift_experiment(mu, &omegas, &ic, &cfg)
    })??;
    let mut table = Table::new(DriftRow::HEADER, &prov);
    for p in &report.points {
        table.push(&DriftRow {
            omega: p.omega,
            max_da: p.max_da,
        });
        if p.escaped {
            table
                .trailer
                .push(format!("omega {} escaped", fmt_f64(p.omega)));
        }
    }
    table.trailer.extend(fit_lines(&report.fit));
    emit(a.common.out.as_deref(), &table.render())?;
    if a.common.out.is_some() {
        fit_lines(&report.fit).iter().for_each(|l| println!("{l}"));
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> i32 {
        run(std::iter::once("kamlab").chain(args.iter().copied()))
    }

    #[test]
    fn cell_parsing() {
        assert_eq!(parse_cell("0.8:14").unwrap(), (0.8, 14.0));
        assert_eq!(parse_cell("-0.5: 2").unwrap(), (-0.5, 2.0));
        assert!(parse_cell("0.8").is_err());
        assert!(parse_cell("a:1").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_args(&["frobnicate"]), 1);
        assert_eq!(run_args(&["sweep", "--bogus"]), 1);
        assert_eq!(run_args(&[]), 1);
        assert_eq!(run_args(&["--help"]), 0);
        assert_eq!(run_args(&["--version"]), 0);
    }

    #[test]
    fn policy_merging() {
        let none = StepArgs {
            h0: None,
            fixed_step: false,
        };
        assert_eq!(
            resolve_policy(None, &none, StepPolicy::default()).unwrap(),
            StepPolicy::default()
        );
        let fixed = StepArgs {
            h0: Some(1e-3),
            fixed_step: true,
        };
        let p = resolve_policy(None, &fixed, StepPolicy::default()).unwrap();
        assert_eq!(
            (p.mode, p.h0, p.h_min, p.h_max),
            (StepMode::Fixed, 1e-3, 1e-3, 1e-3)
        );
        let big = StepArgs {
            h0: Some(0.5),
            fixed_step: false,
        };
        assert_eq!(
            resolve_policy(None, &big, StepPolicy::default())
                .unwrap()
                .h_max,
            0.5
        );
        let bad = StepArgs {
            h0: Some(-1.0),
            fixed_step: false,
        };
        assert!(resolve_policy(None, &bad, StepPolicy::default()).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(
            CliError::from(KamError::NumericFailure { t: 1.0 }).exit_code(),
            2
        );
        assert_eq!(CliError::from(KamError::InvalidModulus(2.0)).exit_code(), 1);
        assert_eq!(CliError::Io("x".into()).exit_code(), 2);
    }
}
