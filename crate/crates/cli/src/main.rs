//! `tracegym`: run inequality suites and single checks from the command line.
//!
//! Exit status: 0 all checks hold, 1 some inequality failed, 2 bad configuration or
//! input, 3 numerical breakdown.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tracegym_core::inequalities::{
    check_alt_multi, check_alt_two, check_gt_multi, check_gt_multi_general, check_gt_two, check_log_trace_multi,
    lie_study, variational_reports,
};
use tracegym_core::quadrature::{build_quadrature, DEFAULT_MAX_NODES};
use tracegym_core::random::{
    empirical_tail, ConstantMode, JointSupport, RandomTensorModel, TailOptions, TailProblem,
};
use tracegym_core::report::InequalityReport;
use tracegym_core::spectral::eigcount_growth;
use tracegym_core::suite::{emit_csv, emit_json, run_suite, Generator, SuiteConfig, SuiteKind};
use tracegym_core::{DenseTensor, Error, Shape};

#[derive(Parser)]
#[command(name = "tracegym", version, about = "Numerical checks of multilinear trace inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite, or all of them.
    Suite(SuiteArgs),
    /// Check one inequality on tensors read from JSON files.
    Check(CheckArgs),
    /// Tail bound for independent random tensors described by JSON model files.
    Tail(TailArgs),
    /// Distinct-eigenvalue growth of Kronecker powers.
    Eigcount(EigcountArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Algebra,
    Pinching,
    TwoTensor,
    Multivariate,
    Lie,
    Entropy,
    LogTrace,
    Tails,
    All,
}

impl From<SuiteName> for SuiteKind {
    fn from(s: SuiteName) -> Self {
        match s {
            SuiteName::Algebra => SuiteKind::Algebra,
            SuiteName::Pinching => SuiteKind::Pinching,
            SuiteName::TwoTensor => SuiteKind::TwoTensor,
            SuiteName::Multivariate => SuiteKind::Multivariate,
            SuiteName::Lie => SuiteKind::Lie,
            SuiteName::Entropy => SuiteKind::Entropy,
            SuiteName::LogTrace => SuiteKind::LogTrace,
            SuiteName::Tails => SuiteKind::Tails,
            SuiteName::All => SuiteKind::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Matricized,
}

impl From<ModeArg> for ConstantMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => ConstantMode::Paper,
            ModeArg::Matricized => ConstantMode::Matricized,
        }
    }
}

#[derive(Args)]
struct SuiteArgs {
    /// Suite to run (positional form).
    #[arg(value_enum)]
    name: Option<SuiteName>,
    /// Suite to run (flag form).
    #[arg(long, value_enum)]
    suite: Option<SuiteName>,
    /// Row dimensions of the square shape, e.g. `2,2`.
    #[arg(long, value_delimiter = ',')]
    shape: Option<Vec<usize>>,
    /// Number of instances.
    #[arg(long = "n")]
    n_instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    /// Numbers of factors for the multivariate, log-trace and tail suites.
    #[arg(long, value_delimiter = ',')]
    factors: Option<Vec<usize>>,
    #[arg(long)]
    quad_budget: Option<f64>,
    /// Draw commuting instances (shared eigenbasis).
    #[arg(long)]
    commuting: bool,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Skip the doubled-quadrature recheck.
    #[arg(long)]
    no_doubling: bool,
    /// JSON result path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV margins table; defaults to the JSON path with a `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    GtTwo,
    AltTwo,
    AltMulti,
    GtMulti,
    GtMultiGeneral,
    LogTrace,
    Variational,
    Lie,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(value_enum)]
    kind: CheckKind,
    /// Tensor JSON files (`row_dims`, `col_dims`, `re`, `im`).
    #[arg(required = true)]
    tensors: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1e-6)]
    quad_budget: f64,
}

#[derive(Args)]
struct TailArgs {
    /// Model JSON files, one per independent summand.
    #[arg(required = true)]
    models: Vec<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    zeta: f64,
    #[arg(long, value_enum, default_value = "paper")]
    mode: ModeArg,
    /// Monte Carlo trials for the empirical tail when enumeration is impossible.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    quad_budget: f64,
}

#[derive(Args)]
struct EigcountArgs {
    tensor: PathBuf,
    #[arg(long, default_value_t = 4)]
    m_max: usize,
}

/// What the process should report back.
enum Outcome {
    Holds,
    Violated,
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Numerical(_) | Error::Convergence(_) | Error::DegenerateSpectrum(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Suite(a) => suite(a),
        Command::Check(a) => check(a),
        Command::Tail(a) => tail(a),
        Command::Eigcount(a) => eigcount(a),
    };
    match result {
        Ok(Outcome::Holds) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn suite(a: SuiteArgs) -> anyhow::Result<Outcome> {
    let mut cfg = SuiteConfig::default();
    if let Some(s) = a.suite.or(a.name) {
        cfg.suite = s.into();
    }
    if let Some(dims) = a.shape {
        cfg.shape = Shape::square(&dims)?;
    }
    if let Some(n) = a.n_instances {
        cfg.n_instances = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(v) = a.theta {
        cfg.theta_list = v;
    }
    if let Some(v) = a.p {
        cfg.p_list = v;
    }
    if let Some(v) = a.q {
        if cfg.suite == SuiteKind::TwoTensor {
            cfg.alt_q_list = v;
        } else {
            cfg.q_list = v;
        }
    }
    if let Some(v) = a.r {
        cfg.r_list = v;
    }
    if let Some(v) = a.factors {
        cfg.n_list = v;
    }
    if let Some(b) = a.quad_budget {
        cfg.quad_budget = b;
    }
    if a.commuting {
        cfg.generator = Generator::Commuting;
    }
    if let Some(m) = a.mode {
        cfg.tail_mode = m.into();
    }
    cfg.doubling_check = !a.no_doubling;
    let result = run_suite(&cfg)?;
    if let Some(out) = &a.out {
        emit_json(&result, out)?;
    }
    let csv_path = a.csv.or_else(|| a.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(path) = &csv_path {
        emit_csv(&result, path)?;
    }
    let s = result.summary;
    eprintln!(
        "{}: {} checks, {} pass, {} equality, {} fail ({} errored) in {:.2}s",
        cfg.suite, s.total, s.pass, s.equality, s.fail, s.errors, result.wall_time_s
    );
    if a.out.is_none() {
        println!("{}", serde_json::to_string_pretty(&result)?);
    }
    Ok(if s.fail == 0 { Outcome::Holds } else { Outcome::Violated })
}

fn read_tensor(path: &Path) -> anyhow::Result<DenseTensor> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

fn need(tensors: &[DenseTensor], count: usize, what: &str) -> anyhow::Result<()> {
    if tensors.len() != count {
        return Err(Error::Domain(format!("{what} takes {count} tensors, got {}", tensors.len())).into());
    }
    Ok(())
}

fn print_reports(reports: &[InequalityReport]) -> anyhow::Result<Outcome> {
    println!("{}", serde_json::to_string_pretty(reports)?);
    Ok(if reports.iter().all(|r| r.verdict.holds()) { Outcome::Holds } else { Outcome::Violated })
}

fn check(a: CheckArgs) -> anyhow::Result<Outcome> {
    let t: Vec<DenseTensor> = a.tensors.iter().map(|p| read_tensor(p)).collect::<anyhow::Result<_>>()?;
    let rho0 = || build_quadrature(0.0, a.quad_budget, DEFAULT_MAX_NODES);
    let reports = match a.kind {
        CheckKind::GtTwo => {
            need(&t, 2, "gt-two")?;
            vec![check_gt_two(&t[0], &t[1])?]
        }
        CheckKind::AltTwo => {
            need(&t, 2, "alt-two")?;
            vec![check_alt_two(&t[0], &t[1], a.r, a.q)?]
        }
        CheckKind::AltMulti => {
            let quad = build_quadrature(a.theta, a.quad_budget, DEFAULT_MAX_NODES)?;
            vec![check_alt_multi(&t, a.theta, a.p, &quad)?]
        }
        CheckKind::GtMulti => vec![check_gt_multi(&t, a.p, &rho0()?)?],
        CheckKind::GtMultiGeneral => vec![check_gt_multi_general(&t, a.p, &rho0()?)?],
        CheckKind::LogTrace => vec![check_log_trace_multi(&t, a.q, &rho0()?)?],
        CheckKind::Variational => {
            need(&t, 3, "variational")?;
            variational_reports(&t[0], &t[1], &t[2])?
        }
        CheckKind::Lie => {
            let study = lie_study(&t, 8)?;
            println!("{}", serde_json::to_string_pretty(&study)?);
            return Ok(Outcome::Holds);
        }
    };
    print_reports(&reports)
}

fn tail(a: TailArgs) -> anyhow::Result<Outcome> {
    let models: Vec<RandomTensorModel> = a
        .models
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(Error::from)?;
            Ok(RandomTensorModel::from_json(&text)?)
        })
        .collect::<anyhow::Result<_>>()?;
    let opts = TailOptions { mode: a.mode.into(), seed: a.seed, ..TailOptions::default() };
    let quad = build_quadrature(0.0, a.quad_budget, DEFAULT_MAX_NODES)?;
    let mut report = TailProblem::new(&models, opts)?.master(a.zeta, &quad)?;
    let exact = JointSupport::enumerate(&models)?.map(|s| s.tail(a.zeta));
    if exact.is_none() && a.trials > 0 {
        report = report.with_empirical(&empirical_tail(&models, a.zeta, a.trials, a.seed)?);
    }
    let violated = exact.is_some_and(|e| e > report.bound + 1e-9);
    println!("{}", serde_json::to_string_pretty(&json!({ "bound": report, "exact_tail": exact }))?);
    Ok(if violated { Outcome::Violated } else { Outcome::Holds })
}

fn eigcount(a: EigcountArgs) -> anyhow::Result<Outcome> {
    let t = read_tensor(&a.tensor)?;
    let growth = eigcount_growth(&t, a.m_max)?;
    println!("{}", serde_json::to_string_pretty(&growth)?);
    Ok(if growth.rows.iter().all(|r| (r.distinct as u128) <= r.bound) { Outcome::Holds } else { Outcome::Violated })
}
