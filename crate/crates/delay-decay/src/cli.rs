//! Argument parsing and dispatch for the `delay-decay` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use delay_decay_core::critical::{
    self, dirac_critical, gamma_critical, linear_grid, truncnormal_point, uniform_point, CurveConfig,
};
use delay_decay_core::feasibility::{check_conditions, find_feasible_mu, gamma_analytic_critical, SearchConfig};
use delay_decay_core::sim::{
    classify, detect_sign_changes, simulate_with_history, verify, InitialHistory, SimConfig, VerifyConfig,
};
use delay_decay_core::{CriticalCurve, CurvePoint, DelayDistribution, Error, PointStatus};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{config_path, merge, parse_config};
use crate::output::{read_history_csv, write_curve_csv, write_json, write_trajectory_csv, TrajectoryJson};
use crate::spec::{parse_dist_spec, render, SpecError};

/// Environment variable capping sweep parallelism; 0 or unset means one
/// thread per core.
pub const THREADS_ENV: &str = "DELAY_DECAY_THREADS";

pub const EXIT_OK: i32 = 0;
/// A `verify` sub-check failed, or output could not be written.
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_SEARCH: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "delay-decay", version, about = "Exponential decay conditions for u'(t) = -∫u(t-s)dP(s)")]
struct Cli {
    /// File of `key = value` lines, one flag per line; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate both moment conditions at one mu.
    Check(CheckArgs),
    /// Search mu > 1 for a point where both conditions hold.
    MuSearch(MuSearchArgs),
    /// Bisect the critical value of one parameter.
    Critical(CriticalArgs),
    /// Critical curve over a grid of a second parameter.
    Sweep(SweepArgs),
    /// Integrate the equation and write the trajectory.
    Simulate(SimulateArgs),
    /// Integrate and report the regime.
    Classify(SimulateArgs),
    /// mu-search, simulation, rate bound and envelope checks.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format (default: text, or csv for sweep/simulate).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, default_value_t = 50.0)]
    mu_max: f64,
    #[arg(long, default_value_t = 512)]
    grid_n: usize,
    #[arg(long)]
    refine_tol: Option<f64>,
}

impl SearchArgs {
    fn config(&self, default_refine: f64) -> SearchConfig {
        SearchConfig { mu_max: self.mu_max, grid_n: self.grid_n, refine_tol: self.refine_tol.unwrap_or(default_refine) }
    }
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    dist: String,
    #[arg(long)]
    mu: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MuSearchArgs {
    #[arg(long)]
    dist: String,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CriticalFamily {
    Dirac,
    Gamma,
    Uniform,
    Truncnormal,
}

#[derive(Args, Debug)]
struct CriticalArgs {
    #[arg(long, value_enum)]
    family: CriticalFamily,
    /// Bracket for dirac (tau) and gamma (lambda).
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    /// Bisection tolerance in the scanned parameter.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Gamma shape.
    #[arg(long)]
    k: Option<f64>,
    /// Uniform left end; the critical length b - a is reported.
    #[arg(long)]
    a: Option<f64>,
    /// Truncated-normal location; the critical sigma is reported.
    #[arg(long, allow_hyphen_values = true)]
    m: Option<f64>,
    #[arg(long)]
    sigma_hi: Option<f64>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SweepFamily {
    Uniform,
    Truncnormal,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    family: SweepFamily,
    /// Grid of uniform left ends, `lo:hi:step` or a comma list [default: 0:0.34:0.02].
    #[arg(long, allow_hyphen_values = true)]
    a_grid: Option<String>,
    /// Grid of truncated-normal locations [default: -0.34:0.34:0.02].
    #[arg(long, allow_hyphen_values = true)]
    m_grid: Option<String>,
    #[arg(long)]
    sigma_hi: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    eps_tail: f64,
    #[arg(long, default_value_t = 4)]
    quad_points: usize,
    /// CSV of `s,u` rows (s <= 0) replacing the constant history u = 1.
    #[arg(long, value_name = "PATH")]
    history: Option<PathBuf>,
}

impl SimArgs {
    fn config(&self, t_end: f64, h: f64) -> SimConfig {
        SimConfig {
            t_end: self.t_end.unwrap_or(t_end),
            h: self.h.unwrap_or(h),
            eps_tail: self.eps_tail,
            quad_points_per_step: self.quad_points,
        }
    }

    fn history(&self) -> Result<InitialHistory, Failure> {
        let Some(path) = &self.history else { return Ok(InitialHistory::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("--history {}: {e}", path.display())))?;
        let rows = read_history_csv(&text).map_err(|e| Failure::Usage(format!("--history {}: {e}", path.display())))?;
        Ok(InitialHistory::Table(rows))
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    dist: String,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    dist: String,
    #[command(flatten)]
    sim: SimArgs,
    /// Fraction of the horizon used for the slope fit.
    #[arg(long, default_value_t = 0.5)]
    window: f64,
    /// Comma list of envelope shifts s > 0.
    #[arg(long, default_value = "0.1,0.3,1.0")]
    s_grid: String,
    #[arg(long, default_value_t = 1e-3)]
    rate_slack: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
    Search(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Domain(_) => EXIT_DOMAIN,
            Failure::Search(_) => EXIT_SEARCH,
            Failure::Io(_) => EXIT_FAILED,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Search(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Bracket { .. } | Error::NonMonotone { .. } => Failure::Search(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

fn dist_arg(spec: &str) -> Result<DelayDistribution, Failure> {
    parse_dist_spec(spec).map_err(|e| match e {
        SpecError::Syntax { .. } => Failure::Usage(format!("--dist: {e}")),
        SpecError::Invalid(_) => Failure::Domain(format!("--dist: {e}")),
    })
}

fn grid_arg(flag: &str, text: &str) -> Result<Vec<f64>, Failure> {
    let bad = |what: &str| Failure::Usage(format!("{flag}: {what} in `{text}` (expected lo:hi:step or a comma list)"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad("bad number"))?;
        return linear_grid(v[0], v[1], v[2]).map_err(|e| Failure::Usage(format!("{flag}: {e}")));
    }
    if parts.len() != 1 {
        return Err(bad("wrong number of fields"));
    }
    text.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad("bad number"))).collect()
}

fn reject(flag: &str, given: bool, family: &str) -> Result<(), Failure> {
    if given {
        return Err(Failure::Usage(format!("{flag} is not used with --family {family}")));
    }
    Ok(())
}

fn thread_count() -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::Usage(format!("{THREADS_ENV}: `{v}` is not a non-negative integer"))),
    }
}

fn status_name(s: PointStatus) -> &'static str {
    match s {
        PointStatus::Critical => "critical",
        PointStatus::InfeasibleEverywhere => "infeasible_everywhere",
        PointStatus::FeasibleEverywhere => "feasible_everywhere",
    }
}

fn tick(ok: bool) -> &'static str {
    if ok {
        "✓"
    } else {
        "✗"
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

/// What a handler produced: bytes for the output sink and an exit status.
struct Outcome {
    bytes: Vec<u8>,
    code: i32,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Outcome { bytes, code: EXIT_OK }
    }
}

type Handler = Result<Outcome, Failure>;

fn io(e: std::io::Error) -> Failure {
    Failure::Io(e.to_string())
}

fn check(args: &CheckArgs) -> Handler {
    let dist = dist_arg(&args.dist)?;
    let r = check_conditions(&dist, args.mu)?;
    let mut w = Vec::new();
    match args.common.format.unwrap_or(Format::Text) {
        Format::Json => write_json(&mut w, "check", Some(render(&dist)), &r).map_err(io)?,
        Format::Csv => {
            writeln!(w, "mu,m_mu,m_2mu,cond1_ok,cond2_ok,rate_bound_y").map_err(io)?;
            writeln!(w, "{},{},{},{},{},{}", r.mu, r.m_mu, r.m_2mu, r.cond1_ok, r.cond2_ok, opt(r.rate_bound_y))
                .map_err(io)?;
        }
        Format::Text => {
            writeln!(w, "dist: {}", render(&dist)).map_err(io)?;
            writeln!(w, "mu: {}", r.mu).map_err(io)?;
            writeln!(w, "M(mu): {}", r.m_mu).map_err(io)?;
            writeln!(w, "M(2mu): {}", r.m_2mu).map_err(io)?;
            writeln!(w, "cond1 M(2mu) <= mu^2: {}", tick(r.cond1_ok)).map_err(io)?;
            writeln!(w, "cond2 M(mu)(M(mu)-1) < mu: {}", tick(r.cond2_ok)).map_err(io)?;
            writeln!(w, "rate_bound_y: {}", opt(r.rate_bound_y)).map_err(io)?;
        }
    }
    Ok(Outcome::ok(w))
}

fn mu_search(args: &MuSearchArgs) -> Handler {
    let dist = dist_arg(&args.dist)?;
    let r = find_feasible_mu(&dist, &args.search.config(SearchConfig::default().refine_tol))?;
    let mut w = Vec::new();
    match args.common.format.unwrap_or(Format::Text) {
        Format::Json => write_json(&mut w, "mu-search", Some(render(&dist)), &r).map_err(io)?,
        Format::Csv => {
            writeln!(w, "mu,violation").map_err(io)?;
            for (mu, v) in &r.search_trace {
                writeln!(w, "{mu},{v}").map_err(io)?;
            }
        }
        Format::Text => {
            writeln!(w, "dist: {}", render(&dist)).map_err(io)?;
            writeln!(w, "feasible: {}", r.feasible).map_err(io)?;
            writeln!(w, "best_mu: {}", opt(r.best_mu)).map_err(io)?;
            writeln!(w, "best_rate_y: {}", opt(r.best_rate_y)).map_err(io)?;
            if let Some(note) = &r.note {
                writeln!(w, "note: {note:?}").map_err(io)?;
            }
            writeln!(w, "evaluations: {}", r.search_trace.len()).map_err(io)?;
        }
    }
    Ok(Outcome::ok(w))
}

#[derive(Serialize)]
struct CriticalResult {
    family: &'static str,
    critical_name: &'static str,
    fixed_params: Vec<(String, f64)>,
    point: CurvePoint,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic: Option<delay_decay_core::feasibility::GammaCritical>,
}

fn critical(args: &CriticalArgs) -> Handler {
    let config = CurveConfig { tol: args.tol, search: args.search.config(CurveConfig::default().search.refine_tol) };
    let result = match args.family {
        CriticalFamily::Dirac => {
            reject("--k", args.k.is_some(), "dirac")?;
            reject("--a", args.a.is_some(), "dirac")?;
            reject("--m", args.m.is_some(), "dirac")?;
            reject("--sigma-hi", args.sigma_hi.is_some(), "dirac")?;
            let p = dirac_critical(args.lo.unwrap_or(0.0), args.hi.unwrap_or(1.0), &config)?;
            CriticalResult { family: "dirac", critical_name: "tau", fixed_params: vec![], point: p, analytic: None }
        }
        CriticalFamily::Gamma => {
            reject("--a", args.a.is_some(), "gamma")?;
            reject("--m", args.m.is_some(), "gamma")?;
            reject("--sigma-hi", args.sigma_hi.is_some(), "gamma")?;
            let k = args.k.unwrap_or(1.0);
            let analytic = Some(gamma_analytic_critical(k)?);
            let p = gamma_critical(k, args.lo.unwrap_or(1.0), args.hi.unwrap_or(1e4), &config)?;
            CriticalResult { family: "gamma", critical_name: "lambda", fixed_params: vec![("k".into(), k)], point: p, analytic }
        }
        CriticalFamily::Uniform => {
            reject("--lo", args.lo.is_some(), "uniform")?;
            reject("--hi", args.hi.is_some(), "uniform")?;
            reject("--k", args.k.is_some(), "uniform")?;
            reject("--m", args.m.is_some(), "uniform")?;
            reject("--sigma-hi", args.sigma_hi.is_some(), "uniform")?;
            let a = args.a.unwrap_or(0.0);
            let p = uniform_point(a, &config)?;
            CriticalResult { family: "uniform", critical_name: "length", fixed_params: vec![("a".into(), a)], point: p, analytic: None }
        }
        CriticalFamily::Truncnormal => {
            reject("--lo", args.lo.is_some(), "truncnormal")?;
            reject("--hi", args.hi.is_some(), "truncnormal")?;
            reject("--k", args.k.is_some(), "truncnormal")?;
            reject("--a", args.a.is_some(), "truncnormal")?;
            let m = args.m.unwrap_or(0.0);
            let p = truncnormal_point(m, args.sigma_hi.unwrap_or(10.0), &config)?;
            CriticalResult { family: "truncnormal", critical_name: "sigma", fixed_params: vec![("m".into(), m)], point: p, analytic: None }
        }
    };
    let mut w = Vec::new();
    match args.common.format.unwrap_or(Format::Text) {
        Format::Json => write_json(&mut w, "critical", None, &result).map_err(io)?,
        Format::Csv => {
            let curve = CriticalCurve {
                family: result.family.into(),
                scan_name: result.fixed_params.first().map_or("none".into(), |p| p.0.clone()),
                critical_name: result.critical_name.into(),
                fixed_params: vec![],
                points: vec![result.point.clone()],
                config,
            };
            write_curve_csv(&mut w, &curve).map_err(io)?;
        }
        Format::Text => {
            let p = &result.point;
            writeln!(w, "family: {}", result.family).map_err(io)?;
            for (k, v) in &result.fixed_params {
                writeln!(w, "{k}: {v}").map_err(io)?;
            }
            writeln!(w, "status: {}", status_name(p.status)).map_err(io)?;
            writeln!(w, "critical {}: {:.6}", result.critical_name, p.critical_value).map_err(io)?;
            writeln!(w, "bracket width: {:e}", p.bracket_width).map_err(io)?;
            writeln!(w, "feasible side: {}", p.feasible_side.as_str()).map_err(io)?;
            if let Some(g) = &result.analytic {
                writeln!(w, "closed-form lambda: {:.6} (covered: {})", g.lambda_crit, g.covered).map_err(io)?;
            }
        }
    }
    Ok(Outcome::ok(w))
}

fn sweep(args: &SweepArgs) -> Handler {
    let config = CurveConfig { tol: args.tol, search: args.search.config(CurveConfig::default().search.refine_tol) };
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Io(format!("thread pool: {e}")))?;
    let curve = match args.family {
        SweepFamily::Uniform => {
            reject("--m-grid", args.m_grid.is_some(), "uniform")?;
            reject("--sigma-hi", args.sigma_hi.is_some(), "uniform")?;
            let grid = grid_arg("--a-grid", args.a_grid.as_deref().unwrap_or("0:0.34:0.02"))?;
            let mut curve = critical::uniform_curve(&config);
            curve.points = pool.install(|| {
                grid.par_iter().map(|&a| uniform_point(a, &config)).collect::<Result<Vec<_>, _>>()
            })?;
            curve.normalize();
            curve
        }
        SweepFamily::Truncnormal => {
            reject("--a-grid", args.a_grid.is_some(), "truncnormal")?;
            let grid = grid_arg("--m-grid", args.m_grid.as_deref().unwrap_or("-0.34:0.34:0.02"))?;
            let sigma_hi = args.sigma_hi.unwrap_or(10.0);
            let mut curve = critical::truncnormal_curve(sigma_hi, &config);
            curve.points = pool.install(|| {
                grid.par_iter().map(|&m| truncnormal_point(m, sigma_hi, &config)).collect::<Result<Vec<_>, _>>()
            })?;
            curve.normalize();
            curve
        }
    };
    let mut w = Vec::new();
    match args.common.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut w, "sweep", None, &curve).map_err(io)?,
        Format::Csv | Format::Text => write_curve_csv(&mut w, &curve).map_err(io)?,
    }
    Ok(Outcome::ok(w))
}

fn simulate_cmd(args: &SimulateArgs) -> Handler {
    let dist = dist_arg(&args.dist)?;
    let traj = simulate_with_history(&dist, &args.sim.config(60.0, 1e-3), args.sim.history()?)?;
    let mut w = Vec::new();
    match args.common.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut w, "simulate", Some(render(&dist)), TrajectoryJson::from(&traj)).map_err(io)?,
        Format::Csv | Format::Text => write_trajectory_csv(&mut w, &traj).map_err(io)?,
    }
    Ok(Outcome::ok(w))
}

#[derive(Serialize)]
struct ClassifyResult {
    regime: &'static str,
    sign_changes: usize,
    blow_up: bool,
    t_last: f64,
}

fn classify_cmd(args: &SimulateArgs) -> Handler {
    let dist = dist_arg(&args.dist)?;
    let traj = simulate_with_history(&dist, &args.sim.config(60.0, 1e-3), args.sim.history()?)?;
    let r = ClassifyResult {
        regime: classify(&traj).as_str(),
        sign_changes: detect_sign_changes(&traj).len(),
        blow_up: traj.blow_up,
        t_last: traj.t_last(),
    };
    let mut w = Vec::new();
    match args.common.format.unwrap_or(Format::Text) {
        Format::Json => write_json(&mut w, "classify", Some(render(&dist)), &r).map_err(io)?,
        Format::Csv => {
            writeln!(w, "regime,sign_changes,blow_up,t_last").map_err(io)?;
            writeln!(w, "{},{},{},{}", r.regime, r.sign_changes, r.blow_up, r.t_last).map_err(io)?;
        }
        Format::Text => {
            writeln!(w, "regime: {}", r.regime).map_err(io)?;
            writeln!(w, "sign_changes: {}", r.sign_changes).map_err(io)?;
            writeln!(w, "blow_up: {}", r.blow_up).map_err(io)?;
        }
    }
    Ok(Outcome::ok(w))
}

fn verify_cmd(args: &VerifyArgs) -> Handler {
    let dist = dist_arg(&args.dist)?;
    if args.sim.history.is_some() {
        return Err(Failure::Usage("--history is not used by verify (the checks assume u = 1 on the history)".into()));
    }
    let defaults = VerifyConfig::default();
    let s_grid = grid_arg("--s-grid", &args.s_grid)?;
    let config = VerifyConfig {
        search: args.search.config(defaults.search.refine_tol),
        sim: args.sim.config(defaults.sim.t_end, defaults.sim.h),
        window_fraction: args.window,
        s_grid,
        rate_slack: args.rate_slack,
    };
    let report = verify(&dist, &config)?;
    let mut w = Vec::new();
    match args.common.format.unwrap_or(Format::Text) {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                passed: bool,
                config: &'a VerifyConfig,
                report: &'a delay_decay_core::sim::VerifyReport,
            }
            let out = Out { passed: report.passed(), config: &config, report: &report };
            write_json(&mut w, "verify", Some(render(&dist)), &out).map_err(io)?;
        }
        Format::Csv => {
            writeln!(w, "check,passed,detail").map_err(io)?;
            for c in &report.checks {
                writeln!(w, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "\"\"")).map_err(io)?;
            }
        }
        Format::Text => {
            writeln!(w, "dist: {}", render(&dist)).map_err(io)?;
            for c in &report.checks {
                writeln!(w, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail).map_err(io)?;
            }
            writeln!(w, "verify: {}", if report.passed() { "PASS" } else { "FAIL" }).map_err(io)?;
        }
    }
    Ok(Outcome { bytes: w, code: if report.passed() { EXIT_OK } else { EXIT_FAILED } })
}

fn dispatch(cli: &Cli) -> Handler {
    let (outcome, out) = match &cli.command {
        Command::Check(a) => (check(a)?, &a.common.out),
        Command::MuSearch(a) => (mu_search(a)?, &a.common.out),
        Command::Critical(a) => (critical(a)?, &a.common.out),
        Command::Sweep(a) => (sweep(a)?, &a.common.out),
        Command::Simulate(a) => (simulate_cmd(a)?, &a.common.out),
        Command::Classify(a) => (classify_cmd(a)?, &a.common.out),
        Command::Verify(a) => (verify_cmd(a)?, &a.common.out),
    };
    match out {
        Some(path) => {
            std::fs::write(path, &outcome.bytes).map_err(|e| Failure::Io(format!("--out {}: {e}", path.display())))?;
            Ok(Outcome { bytes: Vec::new(), code: outcome.code })
        }
        None => Ok(outcome),
    }
}

/// Run the command line `args` (program name first). Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some(path) = config_path(&args) {
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(err, "error: --config {}: {e}", path.to_string_lossy());
                return EXIT_USAGE;
            }
        };
        match parse_config(&text) {
            Ok(flags) => args = merge(args, &flags),
            Err(e) => {
                let _ = writeln!(err, "error: --config {}: {e}", path.to_string_lossy());
                return EXIT_USAGE;
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
                    if e.exit_code() == 0 =>
                {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            match out.write_all(&outcome.bytes).and_then(|_| out.flush()) {
                // A closed reader (`| head`) is not an error.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_FAILED;
                }
                Ok(()) => {}
            }
            outcome.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}
