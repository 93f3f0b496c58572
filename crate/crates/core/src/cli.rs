//! `ellipdist` command-line front end.
//!
//! Subcommands: `solve` a single instance, `benchmark` seeded sweeps, `verify`
//! solvers against each other and `gen` instance files. Every solver flag can
//! also come from a JSON config file (`--config`) whose keys are the long flag
//! names; flags given on the command line win.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{solve_convex, ConvexSolverOptions};
use crate::ellipsoid::Ellipsoid;
use crate::global::{solve_global, DEFAULT_TOL_FEAS};
use crate::instance::{read_instance, to_json};
use crate::nonconvex::{default_start, solve_nonconvex, solve_with_restart, NonconvexSolverOptions, UpdateRule};
use crate::probgen::{analytic_instance, gen_convex, gen_nonconvex};
use crate::report::{SolveReport, Status};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_CONVERGED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_DEGENERATE_GLOBAL: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Admm,
    SaAdmm,
    AdmmNc,
    AdmmNcRestart,
    Global,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Admm => "admm",
            SolverKind::SaAdmm => "sa-admm",
            SolverKind::AdmmNc => "admm-nc",
            SolverKind::AdmmNcRestart => "admm-nc-restart",
            SolverKind::Global => "global",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolArg {
    Convex,
    Nonconvex,
}

impl ProtocolArg {
    fn name(self) -> &'static str {
        match self {
            ProtocolArg::Convex => "convex",
            ProtocolArg::Nonconvex => "nonconvex",
        }
    }

    fn generate(self, d: usize, seed: u64) -> crate::Result<(Ellipsoid, Ellipsoid)> {
        match self {
            ProtocolArg::Convex => gen_convex(d, seed),
            ProtocolArg::Nonconvex => gen_nonconvex(d, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Heuristic,
    Theoretical,
}

/// Solver tuning shared by all subcommands. Mirrors the config file keys.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SolverFlags {
    /// Stopping tolerance
    #[arg(long)]
    pub eps: Option<f64>,
    /// Initial penalty
    #[arg(long)]
    pub tau0: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Penalty growth factor (boundary solvers)
    #[arg(long)]
    pub beta: Option<f64>,
    /// Infeasibility threshold of the heuristic penalty rule
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub update_rule: Option<RuleArg>,
    /// Run the boundary solver once, without the reflection restart
    #[arg(long)]
    #[serde(default)]
    pub no_restart: bool,
}

impl SolverFlags {
    fn overlay(self, base: SolverFlags) -> SolverFlags {
        SolverFlags {
            eps: self.eps.or(base.eps),
            tau0: self.tau0.or(base.tau0),
            eta: self.eta.or(base.eta),
            beta: self.beta.or(base.beta),
            kappa: self.kappa.or(base.kappa),
            max_iters: self.max_iters.or(base.max_iters),
            update_rule: self.update_rule.or(base.update_rule),
            no_restart: self.no_restart || base.no_restart,
        }
    }

    pub fn convex_options(&self, adaptive: bool) -> ConvexSolverOptions {
        let d = ConvexSolverOptions::default();
        ConvexSolverOptions {
            tau0: self.tau0.unwrap_or(d.tau0),
            eta: self.eta.unwrap_or(d.eta),
            epsilon: self.eps.unwrap_or(d.epsilon),
            max_iterations: self.max_iters.unwrap_or(d.max_iterations),
            adaptive,
            ..d
        }
    }

    pub fn nonconvex_options(&self) -> NonconvexSolverOptions {
        let d = NonconvexSolverOptions::default();
        NonconvexSolverOptions {
            tau0: self.tau0.unwrap_or(d.tau0),
            eta: self.eta.unwrap_or(d.eta),
            beta: self.beta.unwrap_or(d.beta),
            kappa: self.kappa.unwrap_or(d.kappa),
            epsilon: self.eps.unwrap_or(d.epsilon),
            epsilon0: self.eps.unwrap_or(d.epsilon0),
            max_iterations: self.max_iters.unwrap_or(d.max_iterations),
            update_rule: match self.update_rule {
                Some(RuleArg::Theoretical) => UpdateRule::Theoretical,
                _ => UpdateRule::Heuristic,
            },
            ..d
        }
    }
}

/// Config file layout: solver flags plus the instance and output selectors.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    pub solver: Option<SolverKind>,
    pub protocol: Option<ProtocolArg>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    #[serde(flatten)]
    pub flags: SolverFlags,
}

#[derive(Debug, Parser)]
#[command(name = "ellipdist", version, about = "Distances between ellipsoids and between their boundaries")]
pub struct Cli {
    /// JSON file with default values for any of the flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and print its run record
    Solve(SolveArgs),
    /// Run seeded sweeps and write one row per instance and solver
    Benchmark(BenchmarkArgs),
    /// Cross-check solvers on seeded instances
    Verify(VerifyArgs),
    /// Write a generated instance as JSON
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance file
    #[arg(long, conflicts_with_all = ["gen", "analytic"])]
    pub instance: Option<PathBuf>,
    /// Generate the instance with this protocol
    #[arg(long, value_enum, conflicts_with = "analytic")]
    pub gen: Option<ProtocolArg>,
    /// Use a closed-form fixture
    #[arg(long)]
    pub analytic: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub flags: SolverFlags,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    /// Comma-separated dimensions
    #[arg(long, value_delimiter = ',', default_value = "10,20")]
    pub dims: Vec<usize>,
    /// Instances per dimension
    #[arg(long, default_value_t = 10)]
    pub count: u64,
    /// Comma-separated solvers
    #[arg(long, value_enum, value_delimiter = ',', default_value = "admm,sa-admm")]
    pub solvers: Vec<SolverKind>,
    /// Seed of the first instance; instance k uses seed + k
    #[arg(long)]
    pub seed: Option<u64>,
    /// Row output; the summary goes next to it with a `.summary.csv` suffix
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub flags: SolverFlags,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub count: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub flags: SolverFlags,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    #[arg(long, conflicts_with = "protocol")]
    pub analytic: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One solve, as written by `solve` and `benchmark`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub protocol: String,
    pub d: usize,
    pub seed: Option<u64>,
    pub solver: String,
    /// Absent when the solver produced no distance (degenerate or failed).
    pub distance: Option<f64>,
    pub iterations: usize,
    pub penalty_updates: usize,
    /// Seconds.
    pub wall_time: f64,
    pub status: String,
    pub rx: f64,
    pub ry: f64,
    pub rc: f64,
}

impl RunRecord {
    fn from_report(protocol: &str, d: usize, seed: Option<u64>, solver: SolverKind, r: &SolveReport, secs: f64) -> Self {
        Self {
            protocol: protocol.to_string(),
            d,
            seed,
            solver: solver.name().to_string(),
            distance: r.distance.is_finite().then_some(r.distance),
            iterations: r.iterations,
            penalty_updates: r.penalty_log.len(),
            wall_time: secs,
            status: r.status.to_string(),
            rx: r.final_residuals.rx,
            ry: r.final_residuals.ry,
            rc: r.final_residuals.rc,
        }
    }

    fn failed(protocol: &str, d: usize, seed: Option<u64>, solver: SolverKind, err: &crate::Error, secs: f64) -> Self {
        Self {
            protocol: protocol.to_string(),
            d,
            seed,
            solver: solver.name().to_string(),
            distance: None,
            iterations: 0,
            penalty_updates: 0,
            wall_time: secs,
            status: format!("Error: {err}"),
            rx: f64::NAN,
            ry: f64::NAN,
            rc: f64::NAN,
        }
    }
}

/// Runs one solver with the flags applied.
pub fn run_solver(kind: SolverKind, e1: &Ellipsoid, e2: &Ellipsoid, flags: &SolverFlags) -> crate::Result<SolveReport> {
    match kind {
        SolverKind::Admm => solve_convex(e1, e2, &flags.convex_options(false)),
        SolverKind::SaAdmm => solve_convex(e1, e2, &flags.convex_options(true)),
        SolverKind::AdmmNcRestart if !flags.no_restart => solve_with_restart(e1, e2, &flags.nonconvex_options()),
        SolverKind::AdmmNc | SolverKind::AdmmNcRestart => {
            let (y0, l0) = default_start(e1.dim());
            solve_nonconvex(e1, e2, &flags.nonconvex_options(), &y0, &l0)
        }
        SolverKind::Global => solve_global(e1, e2, DEFAULT_TOL_FEAS),
    }
}

fn timed_record(kind: SolverKind, e1: &Ellipsoid, e2: &Ellipsoid, flags: &SolverFlags, protocol: &str, seed: Option<u64>) -> RunRecord {
    let start = Instant::now();
    let out = run_solver(kind, e1, e2, flags);
    let secs = start.elapsed().as_secs_f64();
    match out {
        Ok(r) => RunRecord::from_report(protocol, e1.dim(), seed, kind, &r, secs),
        Err(e) => RunRecord::failed(protocol, e1.dim(), seed, kind, &e, secs),
    }
}

pub fn records_to_csv(rows: &[RunRecord]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn records_from_csv(text: &str) -> Result<Vec<RunRecord>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

fn render(rows: &[RunRecord], format: Format) -> Result<String, String> {
    match format {
        Format::Csv => records_to_csv(rows).map_err(|e| e.to_string()),
        Format::Json if rows.len() == 1 => serde_json::to_string_pretty(&rows[0]).map_err(|e| e.to_string()),
        Format::Json => serde_json::to_string_pretty(rows).map_err(|e| e.to_string()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{}", text.trim_end()).map_err(|e| e.to_string())
        }
    }
}

/// Failure of a subcommand, carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else { return Ok(ConfigFile::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        input_error(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })
}

fn status_code(kind: SolverKind, status: &str) -> u8 {
    match status {
        s if s == Status::Converged.as_str() => EXIT_OK,
        s if s == Status::Degenerate.as_str() && kind == SolverKind::Global => EXIT_DEGENERATE_GLOBAL,
        _ => EXIT_NOT_CONVERGED,
    }
}

pub fn cmd_solve(args: SolveArgs, config: ConfigFile) -> Result<u8, CliError> {
    let flags = args.flags.overlay(config.flags);
    let kind = args.solver.or(config.solver).unwrap_or(SolverKind::SaAdmm);
    let format = args.format.or(config.format).unwrap_or_default();
    let out = args.out.or(config.out);
    let seed = args.seed.or(config.seed);

    let (e1, e2, protocol, seed) = if let Some(path) = &args.instance {
        let (a, b) = read_instance(path).map_err(|e| input_error(e.to_string()))?;
        (a, b, "file".to_string(), None)
    } else if let Some(name) = &args.analytic {
        let d = args.d.or(config.d).unwrap_or(2);
        let a = analytic_instance(name, d).map_err(|e| input_error(e.to_string()))?;
        (a.e1, a.e2, format!("analytic:{name}"), None)
    } else {
        let protocol = args
            .gen
            .or(config.protocol)
            .ok_or_else(|| input_error("give one of --instance, --gen or --analytic"))?;
        let d = args.d.or(config.d).ok_or_else(|| input_error("--d is required with --gen"))?;
        let seed = seed.unwrap_or(0);
        let (a, b) = protocol.generate(d, seed).map_err(|e| input_error(e.to_string()))?;
        (a, b, protocol.name().to_string(), Some(seed))
    };

    let start = Instant::now();
    let report = run_solver(kind, &e1, &e2, &flags).map_err(|e| match e {
        crate::Error::InvalidOptions(_) | crate::Error::DimensionMismatch { .. } => input_error(e.to_string()),
        other => CliError {
            code: EXIT_NOT_CONVERGED,
            message: other.to_string(),
        },
    })?;
    let record = RunRecord::from_report(&protocol, e1.dim(), seed, kind, &report, start.elapsed().as_secs_f64());
    emit(&render(std::slice::from_ref(&record), format).map_err(input_error)?, out.as_deref()).map_err(input_error)?;
    Ok(status_code(kind, &record.status))
}

/// Mean iterations and total time per `(d, solver)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub d: usize,
    pub solver: String,
    pub instances: usize,
    pub converged: usize,
    pub mean_iterations: f64,
    pub total_wall_time: f64,
}

pub fn summarize(rows: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.d, r.solver.clone())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((d, solver), g)| SummaryRow {
            d,
            solver,
            instances: g.len(),
            converged: g.iter().filter(|r| r.status == Status::Converged.as_str()).count(),
            mean_iterations: g.iter().map(|r| r.iterations as f64).sum::<f64>() / g.len() as f64,
            total_wall_time: g.iter().map(|r| r.wall_time).sum(),
        })
        .collect()
}

/// Rows for every `(d, instance, solver)`, sorted by `(d, seed, solver)`.
pub fn benchmark_rows(protocol: ProtocolArg, dims: &[usize], count: u64, seed: u64, solvers: &[SolverKind], flags: &SolverFlags) -> Vec<RunRecord> {
    let jobs: Vec<(usize, u64)> = dims.iter().flat_map(|&d| (0..count).map(move |k| (d, seed + k))).collect();
    let mut rows: Vec<(SolverKind, RunRecord)> = jobs
        .par_iter()
        .flat_map_iter(|&(d, s)| {
            let pair = protocol.generate(d, s);
            solvers.iter().map(move |&kind| {
                let rec = match &pair {
                    Ok((a, b)) => timed_record(kind, a, b, flags, protocol.name(), Some(s)),
                    Err(e) => RunRecord::failed(protocol.name(), d, Some(s), kind, e, 0.0),
                };
                (kind, rec)
            })
            .collect::<Vec<_>>()
        })
        .collect();
    rows.sort_by_key(|(k, r)| (r.d, r.seed, *k));
    rows.into_iter().map(|(_, r)| r).collect()
}

fn summary_table(summary: &[SummaryRow]) -> String {
    let mut s = format!("{:>6}  {:<16} {:>9} {:>9} {:>12} {:>10}\n", "d", "solver", "instances", "converged", "mean iters", "time [s]");
    for r in summary {
        s += &format!(
            "{:>6}  {:<16} {:>9} {:>9} {:>12.1} {:>10.3}\n",
            r.d, r.solver, r.instances, r.converged, r.mean_iterations, r.total_wall_time
        );
    }
    s
}

pub fn cmd_benchmark(args: BenchmarkArgs, config: ConfigFile) -> Result<u8, CliError> {
    let flags = args.flags.overlay(config.flags);
    let protocol = args.protocol.or(config.protocol).unwrap_or(ProtocolArg::Convex);
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let format = args.format.or(config.format).unwrap_or(Format::Csv);
    let out = args.out.or(config.out);
    if args.dims.iter().any(|&d| d < 2) {
        return Err(input_error("dimensions must be at least 2"));
    }
    let rows = benchmark_rows(protocol, &args.dims, args.count, seed, &args.solvers, &flags);
    let summary = summarize(&rows);
    let rendered = render(&rows, format).map_err(input_error)?;
    match &out {
        Some(p) => {
            emit(&rendered, Some(p)).map_err(input_error)?;
            let mut summary_csv = csv::Writer::from_writer(Vec::new());
            for r in &summary {
                summary_csv.serialize(r).map_err(|e| input_error(e.to_string()))?;
            }
            let bytes = summary_csv.into_inner().map_err(|e| input_error(e.to_string()))?;
            let sp = p.with_extension("summary.csv");
            std::fs::write(&sp, bytes).map_err(|e| input_error(format!("{}: {e}", sp.display())))?;
            print!("{}", summary_table(&summary));
        }
        None => {
            emit(&rendered, None).map_err(input_error)?;
            eprint!("{}", summary_table(&summary));
        }
    }
    Ok(EXIT_OK)
}

/// Outcome of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub protocol: String,
    pub d: usize,
    pub instances: u64,
    pub compared: u64,
    /// Instances skipped because the global pencils were singular or a solver failed.
    pub skipped: u64,
    pub max_abs_difference: f64,
    /// Compared instances whose distances differ by more than the tolerance.
    pub disagreements: u64,
    pub tolerance: f64,
    /// Boundary protocol only: single runs (no restart) that missed the global distance.
    pub single_run_nonglobal: Option<u64>,
    pub single_run_nonglobal_fraction: Option<f64>,
}

pub fn verify(protocol: ProtocolArg, d: usize, count: u64, seed: u64, flags: &SolverFlags) -> Result<VerifyReport, CliError> {
    if d < 2 {
        return Err(input_error("--d must be at least 2"));
    }
    if protocol == ProtocolArg::Nonconvex && d > 7 {
        return Err(input_error("nonconvex verification runs the global method and requires d <= 7"));
    }
    let tolerance = match protocol {
        ProtocolArg::Convex => 1e-5,
        ProtocolArg::Nonconvex => 1e-4,
    };
    // (difference, single-run difference) per compared instance; None when skipped.
    let outcomes: Vec<Option<(f64, Option<f64>)>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let (a, b) = protocol.generate(d, seed + k).ok()?;
            match protocol {
                ProtocolArg::Convex => {
                    let r1 = run_solver(SolverKind::Admm, &a, &b, flags).ok()?;
                    let r2 = run_solver(SolverKind::SaAdmm, &a, &b, flags).ok()?;
                    (r1.converged() && r2.converged()).then(|| ((r1.distance - r2.distance).abs(), None))
                }
                ProtocolArg::Nonconvex => {
                    let g = run_solver(SolverKind::Global, &a, &b, flags).ok()?;
                    if g.status != Status::Converged {
                        return None;
                    }
                    let restart = SolverFlags { no_restart: false, ..flags.clone() };
                    let r = run_solver(SolverKind::AdmmNcRestart, &a, &b, &restart).ok()?;
                    let s = run_solver(SolverKind::AdmmNc, &a, &b, flags).ok()?;
                    Some(((r.distance - g.distance).abs(), Some((s.distance - g.distance).abs())))
                }
            }
        })
        .collect();
    let compared: Vec<_> = outcomes.iter().flatten().collect();
    let single: Vec<f64> = compared.iter().filter_map(|(_, s)| *s).collect();
    let single_bad = single.iter().filter(|&&s| s > tolerance).count() as u64;
    Ok(VerifyReport {
        protocol: protocol.name().to_string(),
        d,
        instances: count,
        compared: compared.len() as u64,
        skipped: count - compared.len() as u64,
        max_abs_difference: compared.iter().map(|(x, _)| *x).fold(0.0, f64::max),
        disagreements: compared.iter().filter(|(x, _)| *x > tolerance).count() as u64,
        tolerance,
        single_run_nonglobal: (protocol == ProtocolArg::Nonconvex).then_some(single_bad),
        single_run_nonglobal_fraction: (protocol == ProtocolArg::Nonconvex && !single.is_empty())
            .then(|| single_bad as f64 / single.len() as f64),
    })
}

pub fn cmd_verify(args: VerifyArgs, config: ConfigFile) -> Result<u8, CliError> {
    let flags = args.flags.overlay(config.flags);
    let protocol = args.protocol.or(config.protocol).unwrap_or(ProtocolArg::Nonconvex);
    let d = args.d.or(config.d).unwrap_or(5);
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let report = verify(protocol, d, args.count, seed, &flags)?;
    emit(&serde_json::to_string_pretty(&report).expect("report serializes"), None).map_err(input_error)?;
    Ok(if report.disagreements == 0 { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn cmd_gen(args: GenArgs, config: ConfigFile) -> Result<u8, CliError> {
    let d = args.d.or(config.d).unwrap_or(2);
    let (a, b) = if let Some(name) = &args.analytic {
        let a = analytic_instance(name, d).map_err(|e| input_error(e.to_string()))?;
        (a.e1, a.e2)
    } else {
        let protocol = args.protocol.or(config.protocol).unwrap_or(ProtocolArg::Convex);
        protocol
            .generate(d, args.seed.or(config.seed).unwrap_or(0))
            .map_err(|e| input_error(e.to_string()))?
    };
    emit(&to_json(&a, &b), args.out.or(config.out).as_deref()).map_err(input_error)?;
    Ok(EXIT_OK)
}

pub fn run(cli: Cli) -> Result<u8, CliError> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Solve(a) => cmd_solve(a, config),
        Command::Benchmark(a) => cmd_benchmark(a, config),
        Command::Verify(a) => cmd_verify(a, config),
        Command::Gen(a) => cmd_gen(a, config),
    }
}

/// Entry point of the `ellipdist` binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ellipdist").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn solver_names_round_trip() {
        for k in [SolverKind::Admm, SolverKind::SaAdmm, SolverKind::AdmmNc, SolverKind::AdmmNcRestart, SolverKind::Global] {
            assert_eq!(SolverKind::from_str(k.name(), false).unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
    }

    #[test]
    fn flags_override_config() {
        let config: ConfigFile = serde_json::from_str(r#"{"eps": 1e-3, "tau0": 4.0, "solver": "admm", "max-iters": 50}"#).unwrap();
        let cli = parse(&["solve", "--analytic", "disjoint_spheres", "--eps", "1e-9"]);
        let Command::Solve(args) = cli.command else { panic!() };
        let flags = args.flags.overlay(config.flags);
        assert_eq!(flags.eps, Some(1e-9));
        assert_eq!(flags.tau0, Some(4.0));
        assert_eq!(flags.max_iters, Some(50));
        assert!(serde_json::from_str::<ConfigFile>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let rows = vec![
            RunRecord {
                protocol: "convex".into(),
                d: 10,
                seed: Some(7),
                solver: "admm".into(),
                distance: Some(0.1 + 0.2),
                iterations: 45,
                penalty_updates: 0,
                wall_time: 1.25e-3,
                status: "Converged".into(),
                rx: 1e-7,
                ry: 0.0,
                rc: 3.3e-8,
            },
            RunRecord {
                protocol: "file".into(),
                d: 3,
                seed: None,
                solver: "global".into(),
                distance: None,
                iterations: 0,
                penalty_updates: 0,
                wall_time: 0.5,
                status: "Degenerate".into(),
                rx: 0.0,
                ry: 0.0,
                rc: 0.0,
            },
        ];
        assert_eq!(records_from_csv(&records_to_csv(&rows).unwrap()).unwrap(), rows);
        let json = serde_json::to_string(&rows).unwrap();
        assert_eq!(serde_json::from_str::<Vec<RunRecord>>(&json).unwrap(), rows);
    }

    #[test]
    fn benchmark_row_accounting() {
        let rows = benchmark_rows(ProtocolArg::Convex, &[3, 4], 3, 0, &[SolverKind::Admm, SolverKind::SaAdmm], &SolverFlags::default());
        assert_eq!(rows.len(), 12);
        let keys: Vec<_> = rows.iter().map(|r| (r.d, r.seed, r.solver.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        let summary = summarize(&rows);
        assert_eq!(summary.len(), 4);
        assert!(summary.iter().all(|s| s.instances == 3));
    }

    #[test]
    fn exit_status_mapping() {
        assert_eq!(status_code(SolverKind::Global, "Degenerate"), EXIT_DEGENERATE_GLOBAL);
        assert_eq!(status_code(SolverKind::AdmmNc, "Degenerate"), EXIT_NOT_CONVERGED);
        assert_eq!(status_code(SolverKind::Admm, "MaxIterations"), EXIT_NOT_CONVERGED);
        assert_eq!(status_code(SolverKind::Admm, "Converged"), EXIT_OK);
    }
}
