//! Batch runner: seeded instance families checked by every module, with JSON/CSV output.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{
    commuting_family, ginibre, instance_rng, random_density, random_hermitian, random_pd, SpectrumKind,
    DEFAULT_PD_SHIFT,
};
use crate::error::{Error, Result};
use crate::inequalities::{
    check_alt_multi, check_alt_two, check_gt_multi, check_gt_multi_general, check_gt_two, check_log_trace_multi,
    lie_study, log_trace_chain, variational_gap, variational_maximizer, variational_reports,
};
use crate::pinching::{pinch, pinch_via_integral, PinchOptions};
use crate::quadrature::{build_quadrature, QuadratureScheme, DEFAULT_MAX_NODES};
use crate::random::{ConstantMode, JointSupport, RandomTensorModel, TailOptions, TailProblem};
use crate::report::{instance_digest, Direction, InequalityReport, Params, Verdict};
use crate::spectral::{eig_hermitian, exp_hermitian, log_positive, Eigh};
use crate::tensor::{DenseTensor, Shape};

/// Version of the result file layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the worker threads of [`run_suite`].
pub const THREADS_ENV: &str = "TRACEGYM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
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

impl SuiteKind {
    /// Every concrete suite, in run order.
    pub const EACH: [SuiteKind; 8] = [
        SuiteKind::Algebra,
        SuiteKind::Pinching,
        SuiteKind::TwoTensor,
        SuiteKind::Multivariate,
        SuiteKind::Lie,
        SuiteKind::Entropy,
        SuiteKind::LogTrace,
        SuiteKind::Tails,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteKind::Algebra => "algebra",
            SuiteKind::Pinching => "pinching",
            SuiteKind::TwoTensor => "two-tensor",
            SuiteKind::Multivariate => "multivariate",
            SuiteKind::Lie => "lie",
            SuiteKind::Entropy => "entropy",
            SuiteKind::LogTrace => "log-trace",
            SuiteKind::Tails => "tails",
            SuiteKind::All => "all",
        }
    }

    fn stream(&self) -> u64 {
        SuiteKind::EACH.iter().position(|k| k == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::EACH
            .iter()
            .chain([SuiteKind::All].iter())
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// How the tensors of an instance are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    /// Independent Ginibre-based draws.
    Random,
    /// One shared Haar eigenbasis per instance, so all tensors commute.
    Commuting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub suite: SuiteKind,
    pub shape: Shape,
    pub n_instances: usize,
    pub seed: u64,
    pub generator: Generator,
    pub theta_list: Vec<f64>,
    pub p_list: Vec<f64>,
    /// Exponents of the log-trace inequality, in `(0, 1]`.
    pub q_list: Vec<f64>,
    /// `q` of the two-tensor Araki-Lieb-Thirring check.
    pub alt_q_list: Vec<f64>,
    pub r_list: Vec<f64>,
    /// Number of factors for the multivariate, log-trace and tail suites.
    pub n_list: Vec<usize>,
    pub quad_budget: f64,
    pub pd_shift: f64,
    pub tail_mode: ConstantMode,
    pub zeta_points: usize,
    /// Recompute multivariate right-hand sides with doubled panels.
    pub doubling_check: bool,
    /// Run the integral form of the pinching map alongside the spectral one.
    pub pinch_integral: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: SuiteKind::All,
            shape: Shape::square(&[2, 2]).expect("valid"),
            n_instances: 20,
            seed: 7,
            generator: Generator::Random,
            theta_list: vec![0.25, 0.5, 0.75, 1.0],
            p_list: vec![1.0, 2.0, 3.0],
            q_list: vec![1.0, 0.5, 0.25, 0.125],
            alt_q_list: vec![0.5, 1.0, 2.0],
            r_list: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            n_list: vec![2, 3, 4],
            quad_budget: 1e-6,
            pd_shift: DEFAULT_PD_SHIFT,
            tail_mode: ConstantMode::Paper,
            zeta_points: 11,
            doubling_check: true,
            pinch_integral: true,
        }
    }
}

impl SuiteConfig {
    pub fn for_suite(suite: SuiteKind) -> Self {
        Self { suite, ..Self::default() }
    }

    /// Rejects parameter values outside the domains of the checks.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        if self.n_instances == 0 {
            return bad("n_instances must be positive".into());
        }
        if !self.shape.is_square() {
            return bad(format!("suites need a square shape, got {}", self.shape));
        }
        if let Some(t) = self.theta_list.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return bad(format!("theta must lie in (0, 1], got {t}"));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p >= 1.0)) {
            return bad(format!("p must be at least 1, got {p}"));
        }
        if let Some(q) = self.q_list.iter().find(|q| !(**q > 0.0 && **q <= 1.0)) {
            return bad(format!("log-trace q must lie in (0, 1], got {q}"));
        }
        if let Some(q) = self.alt_q_list.iter().find(|q| !(**q > 0.0 && q.is_finite())) {
            return bad(format!("q must be positive, got {q}"));
        }
        if let Some(r) = self.r_list.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return bad(format!("r must be positive, got {r}"));
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n == 0) {
            return bad("n_list must hold positive counts".into());
        }
        if !(self.quad_budget > 0.0) {
            return bad(format!("quadrature budget must be positive, got {}", self.quad_budget));
        }
        if !(self.pd_shift > 0.0) {
            return bad(format!("pd_shift must be positive, got {}", self.pd_shift));
        }
        let runs_tails = matches!(self.suite, SuiteKind::Tails | SuiteKind::All);
        if runs_tails && self.tail_mode == ConstantMode::Paper && !self.shape.is_cubical() {
            return bad(format!("the cubical dimension constant needs a cubical shape, got {}", self.shape));
        }
        if runs_tails && self.zeta_points == 0 {
            return bad("zeta_points must be positive".into());
        }
        Ok(())
    }
}

/// One report tagged with the suite and instance that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub suite: SuiteKind,
    pub instance: usize,
    #[serde(flatten)]
    pub report: InequalityReport,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub equality: usize,
    /// Checks that raised an error (also counted in `fail`).
    pub errors: usize,
}

impl SuiteSummary {
    pub fn from_entries(entries: &[SuiteEntry]) -> Self {
        let mut s = Self { total: entries.len(), ..Self::default() };
        for e in entries {
            match e.report.verdict {
                Verdict::Pass => s.pass += 1,
                Verdict::Fail => s.fail += 1,
                Verdict::Equality => s.equality += 1,
            }
            if e.report.error.is_some() {
                s.errors += 1;
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: SuiteConfig,
    pub summary: SuiteSummary,
    pub reports: Vec<SuiteEntry>,
    pub wall_time_s: f64,
}

impl SuiteResult {
    pub fn entries_for(&self, suite: SuiteKind) -> impl Iterator<Item = &SuiteEntry> {
        self.reports.iter().filter(move |e| e.suite == suite)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SuiteEntry> {
        self.reports.iter().filter(|e| e.report.verdict == Verdict::Fail)
    }

    /// Reports with the wall time cleared, for run-to-run comparison.
    pub fn canonical_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        Ok(serde_json::to_string(&copy)?)
    }
}

/// Quadrature schemes shared by all instances of a run.
struct Schemes {
    rho0: QuadratureScheme,
    by_theta: Vec<(f64, QuadratureScheme)>,
}

impl Schemes {
    fn new(cfg: &SuiteConfig, kind: SuiteKind) -> Result<Self> {
        let rho0 = build_quadrature(0.0, cfg.quad_budget, DEFAULT_MAX_NODES)?;
        let by_theta = if kind == SuiteKind::Multivariate {
            cfg.theta_list
                .iter()
                .map(|&t| Ok((t, build_quadrature(t, cfg.quad_budget, DEFAULT_MAX_NODES)?)))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Self { rho0, by_theta })
    }
}

/// Runs the configured suite(s); instances run in parallel but results are in instance order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteResult> {
    cfg.validate()?;
    let start = Instant::now();
    let kinds: Vec<SuiteKind> = match cfg.suite {
        SuiteKind::All => SuiteKind::EACH.to_vec(),
        k => vec![k],
    };
    let pool = thread_pool()?;
    let mut reports = Vec::new();
    for kind in kinds {
        let schemes = Schemes::new(cfg, kind)?;
        let per_instance: Vec<Vec<InequalityReport>> = pool.install(|| {
            (0..cfg.n_instances)
                .into_par_iter()
                .map(|i| {
                    let mut rng = instance_rng(cfg.seed, (kind.stream() << 32) | i as u64);
                    run_instance(kind, cfg, &schemes, &mut rng)
                })
                .collect()
        });
        for (instance, rs) in per_instance.into_iter().enumerate() {
            reports.extend(rs.into_iter().map(|report| SuiteEntry { suite: kind, instance, report }));
        }
    }
    Ok(SuiteResult {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        summary: SuiteSummary::from_entries(&reports),
        reports,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::Parse(format!("{THREADS_ENV}={v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Resource(e.to_string()))
}

fn run_instance(kind: SuiteKind, cfg: &SuiteConfig, schemes: &Schemes, rng: &mut ChaCha20Rng) -> Vec<InequalityReport> {
    match kind {
        SuiteKind::Algebra => algebra_instance(cfg, rng),
        SuiteKind::Pinching => pinching_instance(cfg, rng),
        SuiteKind::TwoTensor => two_tensor_instance(cfg, rng),
        SuiteKind::Multivariate => multivariate_instance(cfg, schemes, rng),
        SuiteKind::Lie => lie_instance(cfg, rng),
        SuiteKind::Entropy => entropy_instance(cfg, rng),
        SuiteKind::LogTrace => log_trace_instance(cfg, schemes, rng),
        SuiteKind::Tails => tails_instance(cfg, schemes, rng),
        SuiteKind::All => Vec::new(),
    }
}

/// Turns a failed evaluation into an errored report instead of aborting the run.
fn settle(name: &str, r: Result<InequalityReport>) -> InequalityReport {
    r.unwrap_or_else(|e| InequalityReport::errored(name, e))
}

fn settle_many(name: &str, r: Result<Vec<InequalityReport>>) -> Vec<InequalityReport> {
    r.unwrap_or_else(|e| vec![InequalityReport::errored(name, e)])
}

fn residual(name: &str, value: f64, bound: f64, tensors: &[&DenseTensor]) -> InequalityReport {
    InequalityReport::residual(name, value, bound).with_digest(instance_digest(name, tensors))
}

fn hermitians(cfg: &SuiteConfig, rng: &mut ChaCha20Rng, count: usize) -> Vec<DenseTensor> {
    match cfg.generator {
        Generator::Random => (0..count).map(|_| random_hermitian(rng, &cfg.shape)).collect(),
        Generator::Commuting => commuting_family(rng, &cfg.shape, count, SpectrumKind::Hermitian),
    }
}

fn positives(cfg: &SuiteConfig, rng: &mut ChaCha20Rng, count: usize) -> Vec<DenseTensor> {
    match cfg.generator {
        Generator::Random => (0..count).map(|_| random_pd(rng, &cfg.shape, cfg.pd_shift)).collect(),
        Generator::Commuting => {
            commuting_family(rng, &cfg.shape, count, SpectrumKind::Positive { lo: 0.1, hi: 2.0 })
        }
    }
}

fn rel(num: f64, den: f64) -> f64 {
    num / den.max(f64::MIN_POSITIVE)
}

fn algebra_instance(cfg: &SuiteConfig, rng: &mut ChaCha20Rng) -> Vec<InequalityReport> {
    let s = &cfg.shape;
    let a = ginibre(rng, s);
    let b = ginibre(rng, s);
    let h = hermitians(cfg, rng, 2);
    let p = positives(cfg, rng, 2);
    let scale = a.frobenius_norm() * b.frobenius_norm();
    let mut out = Vec::new();

    out.push(settle("einstein_is_matrix_product", (|| {
        let prod = a.einstein_product(&b)?.to_dmatrix();
        let m = a.to_dmatrix() * b.to_dmatrix();
        Ok(residual("einstein_is_matrix_product", rel((prod - m).norm(), scale), 1e-12, &[&a, &b]))
    })()));

    let adj = a.conj_transpose().to_dmatrix() - a.to_dmatrix().adjoint();
    out.push(residual("conjugate_transpose", adj.norm(), 0.0, &[&a]));

    out.push(settle("matricize_round_trip", (|| {
        let back = DenseTensor::dematricize(&a.matricize(), s.clone())?;
        Ok(residual("matricize_round_trip", back.max_abs_diff(&a), 0.0, &[&a]))
    })()));

    out.push(settle("trace_cyclic", (|| {
        let ab = a.einstein_product(&b)?.trace()?;
        let ba = b.einstein_product(&a)?.trace()?;
        Ok(residual("trace_cyclic", rel((ab - ba).norm(), scale), 1e-12, &[&a, &b]))
    })()));

    out.push(settle("kronecker_trace", (|| {
        let k = a.kronecker_product(&b).trace()?;
        let t = a.trace()? * b.trace()?;
        Ok(residual("kronecker_trace", rel((k - t).norm(), scale), 1e-12, &[&a, &b]))
    })()));

    out.push(settle("kronecker_mixed_product", (|| {
        let c = ginibre(rng, s);
        let d = ginibre(rng, s);
        let lhs = a.kronecker_product(&b).einstein_product(&c.kronecker_product(&d))?;
        let rhs = a.einstein_product(&c)?.kronecker_product(&b.einstein_product(&d)?);
        Ok(residual("kronecker_mixed_product", rel(lhs.distance(&rhs), rhs.frobenius_norm()), 1e-12, &[&a, &b, &c, &d]))
    })()));

    out.push(settle("kronecker_exp", (|| {
        let lhs = exp_hermitian(&h[0])?.kronecker_product(&exp_hermitian(&h[1])?);
        let rhs = exp_hermitian(&h[0].kronecker_sum(&h[1])?)?;
        Ok(residual("kronecker_exp", rel(lhs.distance(&rhs), lhs.frobenius_norm()), 1e-10, &[&h[0], &h[1]]))
    })()));

    out.push(settle("kronecker_log", (|| {
        let lhs = log_positive(&p[0].kronecker_product(&p[1]))?;
        let rhs = log_positive(&p[0])?.kronecker_sum(&log_positive(&p[1])?)?;
        Ok(residual("kronecker_log", rel(lhs.distance(&rhs), rhs.frobenius_norm().max(1.0)), 1e-10, &[&p[0], &p[1]]))
    })()));

    out.push(settle("kronecker_sum_spectrum", (|| {
        let e0 = Eigh::new(&h[0])?;
        let e1 = Eigh::new(&h[1])?;
        let mut expected: Vec<f64> =
            e0.values().iter().flat_map(|x| e1.values().iter().map(move |y| x + y)).collect();
        expected.sort_by(f64::total_cmp);
        let got = Eigh::new(&h[0].kronecker_sum(&h[1])?)?;
        let mut got = got.values().to_vec();
        got.sort_by(f64::total_cmp);
        let spread = expected.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let err = got.iter().zip(&expected).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        Ok(residual("kronecker_sum_spectrum", err / spread, 1e-12, &[&h[0], &h[1]]))
    })()));

    out.push(settle("power_semigroup", (|| {
        let e = Eigh::new(&p[0])?;
        let lhs = e.real_power(0.3)?.einstein_product(&e.real_power(0.7)?)?;
        Ok(residual("power_semigroup", rel(lhs.distance(&p[0]), p[0].frobenius_norm()), 1e-10, &[&p[0]]))
    })()));
    out
}

fn pinching_instance(cfg: &SuiteConfig, rng: &mut ChaCha20Rng) -> Vec<InequalityReport> {
    let h = hermitians(cfg, rng, 1).remove(0);
    let x = random_pd(rng, &cfg.shape, cfg.pd_shift);
    let digest = |name: &str| instance_digest(name, &[&h, &x]);
    let mut out = settle_many("pinching", (|| {
        let dec = eig_hermitian(&h, None)?;
        let p = pinch(&dec, &x)?;
        let scale = h.frobenius_norm() * x.frobenius_norm();
        let mut v = Vec::new();
        v.push(InequalityReport::residual("pinching_commutes", rel(p.commutator(&h)?.frobenius_norm(), scale), 1e-10));
        let t_ph = p.einstein_product(&h)?.trace()?;
        let t_xh = x.einstein_product(&h)?.trace()?;
        v.push(InequalityReport::residual("pinching_trace_with_h", rel((t_ph - t_xh).norm(), scale), 1e-10));
        // pinching inequality: P(X) >= X / (number of distinct eigenvalues)
        let j = dec.len() as f64;
        let diff = p.sub(&x.scale_real(1.0 / j))?;
        let lo = Eigh::new(&diff)?.min();
        let loewner = rel((-lo).max(0.0), 1.0 + p.frobenius_norm() + x.frobenius_norm() / j);
        v.push(
            InequalityReport::residual("pinching_inequality", loewner, 1e-10)
                .with_extra("distinct_eigenvalues", dec.len())
                .with_extra("lambda_min_gap", lo),
        );
        let pp = pinch(&dec, &p)?;
        v.push(InequalityReport::residual("pinching_idempotent", rel(pp.distance(&p), p.frobenius_norm()), 1e-12));
        let (tp, tx) = (p.trace()?, x.trace()?);
        v.push(InequalityReport::residual("pinching_trace", rel((tp - tx).norm(), tx.norm()), 1e-12));
        if cfg.pinch_integral && dec.len() > 1 {
            let opts = PinchOptions { error_budget: cfg.quad_budget, ..PinchOptions::default() };
            v.push(match pinch_via_integral(&h, &x, opts) {
                Ok(r) => InequalityReport::residual("pinching_integral", r.tensor.distance(&p), cfg.quad_budget)
                    .with_extra("nodes", r.nodes)
                    .with_extra("delta", r.delta)
                    .with_extra("half_width", r.half_width),
                Err(e) => InequalityReport::errored("pinching_integral", e),
            });
        }
        Ok(v)
    })());
    for r in &mut out {
        r.instance_digest = digest(&r.name);
    }
    out
}

fn two_tensor_instance(cfg: &SuiteConfig, rng: &mut ChaCha20Rng) -> Vec<InequalityReport> {
    let h = hermitians(cfg, rng, 2);
    let a = positives(cfg, rng, 2);
    let mut out = vec![settle("gt_two", check_gt_two(&h[0], &h[1]))];
    for &r in &cfg.r_list {
        for &q in &cfg.alt_q_list {
            out.push(settle("alt_two", check_alt_two(&a[0], &a[1], r, q)));
        }
    }
    out
}

fn multivariate_instance(cfg: &SuiteConfig, schemes: &Schemes, rng: &mut ChaCha20Rng) -> Vec<InequalityReport> {
    let mut out = Vec::new();
    for &n in &cfg.n_list {
        let a = positives(cfg, rng, n);
        let h = hermitians(cfg, rng, n);
        let g: Vec<DenseTensor> = match cfg.generator {
            Generator::Random => (0..n).map(|_| ginibre(rng, &cfg.shape).scale_real(0.5)).collect(),
            Generator::Commuting => h.iter().map(|x| x.scale_real(0.5)).collect(),
        };
        for (theta, quad) in &schemes.by_theta {
            for &p in &cfg.p_list {
                let r = check_alt_multi(&a, *theta, p, quad);
                let r = with_doubling(cfg, r, quad, |q| check_alt_multi(&a, *theta, p, q));
                out.push(settle("alt_multi", r));
            }
        }
        for &p in &cfg.p_list {
            let q0 = &schemes.rho0;
            let r = with_doubling(cfg, check_gt_multi(&h, p, q0), q0, |q| check_gt_multi(&h, p, q));
            out.push(settle("gt_multi", r));
            let r = with_doubling(cfg, check_gt_multi_general(&g, p, q0), q0, |q| check_gt_multi_general(&g, p, q));
            out.push(settle("gt_multi_general", r));
        }
    }
    out
}

/// Records how much the right-hand side moves when the quadrature panels are doubled.
fn with_doubling(
    cfg: &SuiteConfig,
    r: Result<InequalityReport>,
    quad: &QuadratureScheme,
    recheck: impl FnOnce(&QuadratureScheme) -> Result<InequalityReport>,
) -> Result<InequalityReport> {
    let r = r?;
    if !cfg.doubling_check || quad.is_dirac() {
        return Ok(r);
    }
    let fine = recheck(&quad.refined())?;
    let change = (fine.rhs - r.rhs).abs();
    Ok(r.with_extra("rhs_doubling_change", change))
}

/// Slope window for the first-order Lie product error.
pub const LIE_SLOPE_RANGE: (f64, f64) = (-1.3, -0.7);

fn lie_instance(cfg: &SuiteConfig, rng: &mut ChaCha20Rng) -> Vec<InequalityReport> {
    let h = hermitians(cfg, rng, 2);
    let refs = [&h[0], &h[1]];
    match lie_study(&h, 8) {
        Err(e) => vec![InequalityReport::errored("lie_slope", e)],
        Ok(study) => {
            let mut out = Vec::new();
            let errors = serde_json::to_value(&study.errors).unwrap_or_default();
            match study.slope {
                Some(slope) => {
                    let (lo, hi) = LIE_SLOPE_RANGE;
                    let off = (lo - slope).max(slope - hi).max(0.0);
                    out.push(
                        residual("lie_slope", off, 0.0, &refs)
                            .with_extra("slope", slope)
                            .with_extra("errors", errors),
                    );
                }
                None => out.push(
                    residual("lie_commuting", study.errors.iter().fold(0.0f64, |m, e| m.max(*e)), 1e-10, &refs)
                        .with_extra("errors", errors),
                ),
            }
            out.push(residual("lie_monotone", if study.monotone { 0.0 } else { 1.0 }, 0.0, &refs));
            out
        }
    }
}

/// Largest `|g1|` accepted at the closed-form maximizer.
pub const MAXIMIZER_GAP_TOL: f64 = 1e-7;

fn entropy_instance(cfg: &SuiteConfig, rng: &mut ChaCha20Rng) -> Vec<InequalityReport> {
    let a = random_density(rng, &cfg.shape, cfg.pd_shift);
    let b = random_pd(rng, &cfg.shape, cfg.pd_shift);
    let x = random_pd(rng, &cfg.shape, cfg.pd_shift);
    let mut out = settle_many("variational", variational_reports(&a, &b, &x));
    out.push(settle("variational_maximizer", (|| {
        let xm = variational_maximizer(&a, &b)?;
        let g = variational_gap(&a, &b, &xm)?;
        Ok(residual("variational_maximizer", g.g1.abs(), MAXIMIZER_GAP_TOL, &[&a, &b])
            .with_extra("g2", g.g2)
            .with_extra("relative_entropy", g.relative_entropy))
    })()));
    out
}

fn log_trace_instance(cfg: &SuiteConfig, schemes: &Schemes, rng: &mut ChaCha20Rng) -> Vec<InequalityReport> {
    let mut out = Vec::new();
    for &n in cfg.n_list.iter().filter(|&&n| n >= 2) {
        let mut a = vec![random_density(rng, &cfg.shape, cfg.pd_shift)];
        a.extend(positives(cfg, rng, n - 1));
        for &q in &cfg.q_list {
            out.push(settle("log_trace_multi", check_log_trace_multi(&a, q, &schemes.rho0)));
        }
        if n == 2 {
            for &q in &cfg.q_list {
                out.extend(settle_many("log_trace_chain", (|| {
                    let (left, middle, right) = log_trace_chain(&a[0], &a[1], q)?;
                    let multi = check_log_trace_multi(&a, q, &schemes.rho0)?;
                    let params = Params { q: Some(q), n: Some(2), ..Params::default() };
                    let digest = instance_digest("log_trace_chain", &[&a[0], &a[1]]);
                    let agree = (multi.rhs - left).abs() / (1.0 + left.abs());
                    Ok(vec![
                        InequalityReport::residual("log_trace_two_agreement", agree, 1e-8)
                            .with_params(params.clone())
                            .with_digest(digest.clone()),
                        InequalityReport::new("log_trace_chain_left", left, middle, Direction::Leq, tol(left, middle))
                            .with_params(params.clone())
                            .with_digest(digest.clone()),
                        InequalityReport::new("log_trace_chain_right", middle, right, Direction::Leq, tol(middle, right))
                            .with_params(params)
                            .with_digest(digest),
                    ])
                })()));
            }
        }
    }
    out
}

fn tol(l: f64, r: f64) -> f64 {
    crate::report::verdict_tolerance(l, r, 0.0)
}

/// Absolute slack allowed between an exact tail probability and its bound.
pub const TAIL_TOL: f64 = 1e-9;

/// Rademacher models `eps_k A_k` with random Hermitian atoms of spectral norm at most 1.
fn rademacher_family(cfg: &SuiteConfig, rng: &mut ChaCha20Rng, n: usize) -> Result<Vec<RandomTensorModel>> {
    hermitians(cfg, rng, n)
        .into_iter()
        .map(|h| {
            let e = Eigh::new(&h)?;
            let norm = e.max().abs().max(e.min().abs()).max(f64::MIN_POSITIVE);
            let scale = rng.random_range(0.5..=1.0) / norm;
            RandomTensorModel::rademacher(h.scale_real(scale))
        })
        .collect()
}

/// `points` equally spaced thresholds spanning `[lo, hi]`.
pub fn zeta_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect(),
    }
}

fn tails_instance(cfg: &SuiteConfig, schemes: &Schemes, rng: &mut ChaCha20Rng) -> Vec<InequalityReport> {
    let mut out = Vec::new();
    for &n in &cfg.n_list {
        out.extend(settle_many("master_tail", (|| {
            let models = rademacher_family(cfg, rng, n)?;
            let support = JointSupport::enumerate(&models)?
                .ok_or_else(|| Error::Resource("joint support too large to enumerate".into()))?;
            let (lo, hi) = support.spectrum_range();
            let zetas = zeta_grid(lo, hi, cfg.zeta_points);
            let opts = TailOptions { mode: cfg.tail_mode, ..TailOptions::default() };
            let bounds = TailProblem::new(&models, opts)?.master_many(&zetas, &schemes.rho0)?;
            let atoms: Vec<DenseTensor> = models
                .iter()
                .filter_map(|m| m.support().map(|s| s[0].1.clone()))
                .collect();
            let refs: Vec<&DenseTensor> = atoms.iter().collect();
            let digest = instance_digest("master_tail", &refs);
            Ok(bounds
                .into_iter()
                .map(|b| {
                    let tail = support.tail(b.zeta);
                    let mut r = InequalityReport::new("master_tail", tail, b.bound, Direction::Leq, TAIL_TOL)
                        .with_params(Params { n: Some(n), zeta: Some(b.zeta), ..Params::default() })
                        .with_digest(digest.clone())
                        .with_extra("t_star", b.t_star)
                        .with_extra("bound_matricized", b.bound_matricized)
                        .with_extra("log_raw_bound", b.log_raw_bound);
                    if let Some(bp) = b.bound_paper {
                        r = r.with_extra("bound_paper", bp);
                    }
                    if let Some(q) = b.quad {
                        r = r.with_quad(q);
                    }
                    r
                })
                .collect())
        })()));
    }
    out
}

/// Writes the full result as pretty JSON.
pub fn emit_json(result: &SuiteResult, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), result)?;
    Ok(())
}

#[derive(Serialize)]
struct CsvRow<'a> {
    suite: &'a str,
    instance: usize,
    name: &'a str,
    theta: Option<f64>,
    p: Option<f64>,
    q: Option<f64>,
    r: Option<f64>,
    n: Option<usize>,
    zeta: Option<f64>,
    lhs: f64,
    rhs: f64,
    margin: f64,
    tolerance: f64,
    verdict: &'a str,
}

/// One row per report: parameters, both sides, margin and verdict.
pub fn emit_csv(result: &SuiteResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in &result.reports {
        let r = &e.report;
        w.serialize(CsvRow {
            suite: e.suite.as_str(),
            instance: e.instance,
            name: &r.name,
            theta: r.params.theta,
            p: r.params.p,
            q: r.params.q,
            r: r.params.r,
            n: r.params.n,
            zeta: r.params.zeta,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            tolerance: r.tolerance,
            verdict: r.verdict.as_str(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: SuiteKind) -> SuiteConfig {
        SuiteConfig {
            suite: kind,
            shape: Shape::square(&[2]).unwrap(),
            n_instances: 2,
            n_list: vec![2, 3],
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for k in SuiteKind::EACH {
            assert_eq!(k.as_str().parse::<SuiteKind>().unwrap(), k);
        }
        assert!("nope".parse::<SuiteKind>().is_err());
    }

    #[test]
    fn validation_rejects_bad_domains() {
        let mut c = SuiteConfig::default();
        c.theta_list = vec![0.0];
        assert!(matches!(c.validate(), Err(Error::Domain(_))));
        let mut c = SuiteConfig::default();
        c.q_list = vec![1.5];
        assert!(c.validate().is_err());
        let mut c = SuiteConfig::default();
        c.shape = Shape::square(&[2, 3]).unwrap();
        assert!(c.validate().is_err());
        c.tail_mode = ConstantMode::Matricized;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn every_small_suite_passes() {
        for k in SuiteKind::EACH {
            let res = run_suite(&small(k)).unwrap();
            assert!(res.summary.total > 0, "{k}");
            let fails: Vec<_> = res.failures().map(|e| (&e.report.name, e.report.margin, &e.report.error)).collect();
            assert!(fails.is_empty(), "{k}: {fails:?}");
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let c = small(SuiteKind::TwoTensor);
        let a = run_suite(&c).unwrap().canonical_json().unwrap();
        let b = run_suite(&c).unwrap().canonical_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_and_json_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let res = run_suite(&small(SuiteKind::Entropy)).unwrap();
        emit_json(&res, &dir.path().join("r.json")).unwrap();
        emit_csv(&res, &dir.path().join("r.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
        let back: SuiteResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back.reports.len(), res.reports.len());
        let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
        assert_eq!(csv.lines().count(), res.reports.len() + 1);
    }
}
