//! The `sepnm` command line: `generate`, `solve`, `verify` and `bench`.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 validation error,
//! 3 unreadable or malformed input, 4 inner-solver failure.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{check_assumptions, AssumptionReport};
use crate::problems::{self, generate_planted, verify_planted, PlantedReport, ProblemError, ProblemSpec};
use crate::solver::{self, trace_csv, Mode, RunSummary, Schedule, SolveReport, SolverConfig, Status, ValidatedConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_INNER_FAILURE: i32 = 4;

/// Default directory for generated problems, reports and traces.
pub const OUT_DIR_ENV: &str = "SEPNM_OUT_DIR";

#[derive(Debug, Clone, Parser)]
#[command(name = "sepnm", version, about = "Split equilibrium problems with nonexpansive mappings")]
pub struct RunRequest {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Write a random instance with a known solution.
    Generate(GenerateArgs),
    /// Run a solver on a problem file.
    Solve(SolveArgs),
    /// Check a problem file's planted solution and monotonicity claims.
    Verify(VerifyArgs),
    /// Solve generated instances over a range of seeds.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Weak,
    Strong,
    /// weak with `S = T = I`
    SepWeak,
    /// strong with `S = T = I`
    SepStrong,
}

impl Algorithm {
    fn mode(self) -> Mode {
        match self {
            Algorithm::Weak | Algorithm::SepWeak => Mode::Weak,
            Algorithm::Strong | Algorithm::SepStrong => Mode::Strong,
        }
    }

    fn sep(self) -> bool {
        matches!(self, Algorithm::SepWeak | Algorithm::SepStrong)
    }

    fn name(self) -> &'static str {
        match self {
            Algorithm::Weak => "weak",
            Algorithm::Strong => "strong",
            Algorithm::SepWeak => "sep-weak",
            Algorithm::SepStrong => "sep-strong",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// defaults to `$SEPNM_OUT_DIR/planted-n<N>-m<M>-seed<SEED>.json`, else stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Solver parameters; anything left out takes the solver default.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// constant λ_k
    #[arg(long)]
    pub lambda: Option<f64>,
    /// weight of `S` in `t = (1 − α)z + αSz`
    #[arg(long)]
    pub alpha: Option<f64>,
    /// μ as a fraction of `1/U`, where `U ≥ ‖A‖²`; must lie in (0, 1)
    #[arg(long, value_parser = parse_mu_fraction)]
    pub mu_fraction: Option<f64>,
    /// constant resolvent parameter α_k
    #[arg(long)]
    pub alpha_k: Option<f64>,
    /// μ·U with no range check; for negative controls only
    #[arg(long, hide = true, conflicts_with = "mu_fraction")]
    pub unsafe_mu: Option<f64>,
}

fn parse_mu_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value = "weak")]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub overrides: Overrides,
    /// JSON run summary; defaults to `$SEPNM_OUT_DIR/<stem>.<algorithm>.report.json`, else stdout
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV trace; defaults to `$SEPNM_OUT_DIR/<stem>.<algorithm>.trace.csv`, else not written
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// `a..b` (inclusive), `a..=b`, or a single seed
    #[arg(long, value_parser = parse_seeds, default_value = "1..10")]
    pub seeds: RangeInclusive<u64>,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long, value_enum, default_value = "weak")]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub overrides: Overrides,
}

fn parse_seeds(s: &str) -> Result<RangeInclusive<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad seed {t:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let v = num(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty seed range {s}"));
    }
    Ok(lo..=hi)
}

/// Executes one request and returns the process exit status. Diagnostics go
/// to standard error.
pub fn run(request: RunRequest) -> i32 {
    let result = match request.command {
        Command::Generate(args) => generate(&args),
        Command::Solve(args) => solve(&args),
        Command::Verify(args) => verify(&args),
        Command::Bench(args) => bench(&args),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ProblemError> for Failure {
    fn from(e: ProblemError) -> Self {
        let code = match e {
            ProblemError::Invalid(_) | ProblemError::NoPlantedSolution => EXIT_VALIDATION,
            ProblemError::Io { .. } | ProblemError::Parse(_) => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

fn out_dir() -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new(EXIT_OUTPUT, format!("cannot write {}: {e}", path.display())))
}

fn generate(args: &GenerateArgs) -> Result<i32, Failure> {
    if args.n == 0 || args.m == 0 {
        return Err(Failure::new(EXIT_VALIDATION, "--n and --m must be positive"));
    }
    let p = generate_planted(args.n, args.m, args.seed);
    let out = args.out.clone().or_else(|| {
        out_dir().map(|d| d.join(format!("planted-n{}-m{}-seed{}.json", args.n, args.m, args.seed)))
    });
    match out {
        Some(path) => {
            problems::save(&p, &path).map_err(|e| Failure::new(EXIT_OUTPUT, e.to_string()))?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{}", p.to_json()?),
    }
    Ok(EXIT_OK)
}

/// Defaults for `algorithm` with `overrides` applied, validated against
/// `problem`.
pub fn build_config(
    problem: &ProblemSpec,
    algorithm: Algorithm,
    overrides: &Overrides,
) -> Result<ValidatedConfig, Vec<String>> {
    let mut cfg = SolverConfig::defaults_for(problem, algorithm.mode());
    cfg.sep_mode = algorithm.sep();
    if let Some(v) = overrides.tol {
        cfg.tol = v;
    }
    if let Some(v) = overrides.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = overrides.lambda {
        cfg.lambda = Schedule::Constant(v);
    }
    if let Some(v) = overrides.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = overrides.alpha_k {
        cfg.alpha_k = Schedule::Constant(v);
    }
    if let Some(f) = overrides.mu_fraction {
        if !(f > 0.0 && f < 1.0) {
            return Err(vec![format!("mu fraction {f} is not in (0, 1)")]);
        }
        cfg.mu = f / solver::norm_bound(problem);
    }
    let validated = solver::validate(cfg, problem).map_err(|v| v.iter().map(|e| e.to_string()).collect::<Vec<_>>())?;
    Ok(match overrides.unsafe_mu {
        Some(scaled) => {
            let mut cfg = validated.config().clone();
            cfg.mu = scaled / validated.norm_bound();
            ValidatedConfig::assume_valid(cfg, problem)
        }
        None => validated,
    })
}

fn config_or_fail(problem: &ProblemSpec, algorithm: Algorithm, overrides: &Overrides) -> Result<ValidatedConfig, Failure> {
    build_config(problem, algorithm, overrides)
        .map_err(|v| Failure::new(EXIT_VALIDATION, format!("invalid parameters:\n  {}", v.join("\n  "))))
}

fn solve(args: &SolveArgs) -> Result<i32, Failure> {
    let problem = problems::load(&args.problem)?;
    let cfg = config_or_fail(&problem, args.algorithm, &args.overrides)?;
    let report = solver::solve(&problem, &cfg);
    let x_star = problem.planted_solution.as_ref();

    let stem = args.problem.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
    let default_path = |ext: &str| out_dir().map(|d| d.join(format!("{stem}.{}.{ext}", args.algorithm.name())));

    if let Some(path) = args.trace.clone().or_else(|| default_path("trace.csv")) {
        write_file(&path, &trace_csv(&report, &problem.x1, x_star))?;
    }
    let summary = RunSummary::new(&report, &cfg, &problem);
    let json = serde_json::to_string_pretty(&summary).expect("run summary serializes");
    match args.report.clone().or_else(|| default_path("report.json")) {
        Some(path) => write_file(&path, &(json + "\n"))?,
        None => println!("{json}"),
    }
    Ok(status_code(&report))
}

fn status_code(report: &SolveReport) -> i32 {
    match report.status {
        Status::Converged => EXIT_OK,
        Status::MaxIterReached => {
            eprintln!(
                "warning: iteration budget exhausted after {} iterations (residual {:.3e})",
                report.iterations, report.final_residual
            );
            EXIT_OK
        }
        Status::InnerFailure => {
            let why = report.failure.as_ref().map(|e| e.to_string()).unwrap_or_default();
            eprintln!("error: {why}");
            EXIT_INNER_FAILURE
        }
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    planted: Option<PlantedReport>,
    f_assumptions: AssumptionReport,
    g_assumptions: AssumptionReport,
    clean: bool,
}

fn verify(args: &VerifyArgs) -> Result<i32, Failure> {
    let problem = problems::load(&args.problem)?;
    let planted = match verify_planted(&problem, args.samples, args.seed) {
        Ok(r) => Some(r),
        Err(ProblemError::NoPlantedSolution) => None,
        Err(e) => return Err(e.into()),
    };
    let f_assumptions = check_assumptions(&problem.f, &problem.c, args.samples, args.seed);
    let g_assumptions = check_assumptions(&problem.g, &problem.q, args.samples, args.seed.wrapping_add(1));
    let clean = planted.is_none_or(|r| r.is_clean())
        && f_assumptions.is_clean(problem.f.monotonicity)
        && g_assumptions.is_clean(problem.g.monotonicity);
    let out = VerifyOutput { planted, f_assumptions, g_assumptions, clean };
    println!("{}", serde_json::to_string_pretty(&out).expect("verify output serializes"));
    if clean {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: some check exceeded its tolerance");
        Ok(EXIT_VALIDATION)
    }
}

struct BenchRow {
    seed: u64,
    status: Status,
    iterations: usize,
    residual: f64,
    distance: f64,
}

/// Runs every seed and returns the rows in seed order.
pub fn bench_table(args: &BenchArgs) -> Result<String, (i32, String)> {
    if args.n == 0 || args.m == 0 {
        return Err((EXIT_VALIDATION, "--n and --m must be positive".into()));
    }
    let seeds: Vec<u64> = args.seeds.clone().collect();
    let rows: Result<Vec<BenchRow>, Failure> = seeds
        .par_iter()
        .map(|&seed| {
            let problem = generate_planted(args.n, args.m, seed);
            let cfg = config_or_fail(&problem, args.algorithm, &args.overrides)?;
            let report = solver::solve(&problem, &cfg);
            let x_star = problem.planted_solution.as_ref().expect("generated problems are planted");
            Ok(BenchRow {
                seed,
                status: report.status,
                iterations: report.iterations,
                residual: report.final_residual,
                distance: report.final_x.dist(x_star),
            })
        })
        .collect();
    let rows = rows.map_err(|f| (f.code, f.message))?;

    let mut out = format!("{:>6}  {:<14}  {:>10}  {:>12}  {:>12}\n", "seed", "status", "iterations", "residual", "dist_xstar");
    for r in &rows {
        let _ = writeln!(
            out,
            "{:>6}  {:<14}  {:>10}  {:>12.4e}  {:>12.4e}",
            r.seed,
            format!("{:?}", r.status),
            r.iterations,
            r.residual,
            r.distance
        );
    }
    if rows.iter().any(|r| r.status == Status::InnerFailure) {
        return Err((EXIT_INNER_FAILURE, out));
    }
    Ok(out)
}

fn bench(args: &BenchArgs) -> Result<i32, Failure> {
    match bench_table(args) {
        Ok(table) => {
            print!("{table}");
            Ok(EXIT_OK)
        }
        Err((EXIT_INNER_FAILURE, table)) => {
            print!("{table}");
            Err(Failure::new(EXIT_INNER_FAILURE, "inner solver failed on some seeds"))
        }
        Err((code, message)) => Err(Failure::new(code, message)),
    }
}
