//! Acceptance criteria, one line each.
//!
//! Runs without the libtest harness so the verdict lines always reach the terminal.
//! A criterion listed in `KNOWN_FAILURES` is expected to fail (the violation is a
//! reproducible finding, not a tolerance problem); the process exits nonzero if any
//! criterion deviates from its expected outcome in either direction.

use std::process::ExitCode;

use tracegym_core::ensembles::pauli_z;
use tracegym_core::quadrature::{build_quadrature, DEFAULT_MAX_NODES};
use tracegym_core::random::{master_tail_bound, JointSupport, RandomTensorModel, TailOptions};
use tracegym_core::report::{InequalityReport, Verdict};
use tracegym_core::suite::{run_suite, Generator, SuiteConfig, SuiteEntry, SuiteKind, SuiteResult};
use tracegym_core::Shape;

/// Algebraic identities, relative residual.
const ALGEBRA_TOL: f64 = 1e-9;
/// Integral form of the pinching map vs. the spectral form, Frobenius distance.
const PINCH_INTEGRAL_TOL: f64 = 1e-6;
/// Inequalities: margin >= -SLACK_REL * (1 + |lhs| + |rhs|).
const SLACK_REL: f64 = 1e-7;
/// Commuting instances: |margin| <= EQUALITY_REL * (1 + |lhs| + |rhs|).
const EQUALITY_REL: f64 = 1e-8;
/// ALT at r = 1 is an identity.
const R1_TOL: f64 = 1e-12;
/// Change of any right-hand side when the quadrature panels are doubled.
const DOUBLING_TOL: f64 = 1e-6;
const LIE_SLOPE: (f64, f64) = (-1.3, -0.7);
/// Fraction of instances whose log-trace margin shrinks from q = 1 to q = 1/8.
const TREND_FRACTION: f64 = 0.9;
/// Two-tensor log-trace right-hand side vs. the matrix chain member.
const CHAIN_TOL: f64 = 1e-8;
const LOG_TRACE_TRIPLES: usize = 300;
const GAP_TOL: f64 = 1e-8;
const MAXIMIZER_TOL: f64 = 1e-7;
const PAULI_TOL: f64 = 1e-9;

/// Criteria whose statement is violated by reproducible counterexamples.
const KNOWN_FAILURES: &[usize] = &[6];

struct Outcome {
    id: usize,
    pass: bool,
    title: &'static str,
    detail: String,
}

fn scale(r: &InequalityReport) -> f64 {
    1.0 + r.lhs.abs() + r.rhs.abs()
}

fn run(cfg: SuiteConfig) -> SuiteResult {
    run_suite(&cfg).unwrap_or_else(|e| panic!("{} suite did not run: {e}", cfg.suite))
}

fn named<'a>(res: &'a SuiteResult, name: &'a str) -> impl Iterator<Item = &'a SuiteEntry> + 'a {
    res.reports.iter().filter(move |e| e.report.name == name)
}

fn cfg(suite: SuiteKind, dims: &[usize], n: usize) -> SuiteConfig {
    SuiteConfig { suite, shape: Shape::square(dims).expect("valid"), n_instances: n, ..SuiteConfig::default() }
}

fn algebra() -> Outcome {
    let res = run(cfg(SuiteKind::Algebra, &[2, 2], 200));
    let worst = res.reports.iter().map(|e| e.report.lhs).fold(0.0, f64::max);
    let pass = res.summary.fail == 0 && worst <= ALGEBRA_TOL;
    Outcome {
        id: 1,
        pass,
        title: "algebra identities",
        detail: format!("{} instances, {} checks, worst residual {worst:.2e}", res.config.n_instances, res.summary.total),
    }
}

fn pinching() -> Outcome {
    let mut checks = 0;
    let mut fails = 0;
    let mut integral = 0;
    let mut worst_integral: f64 = 0.0;
    for dims in [&[2][..], &[2, 2][..]] {
        let res = run(cfg(SuiteKind::Pinching, dims, 200));
        checks += res.summary.total;
        fails += res.summary.fail;
        for e in named(&res, "pinching_integral") {
            integral += 1;
            worst_integral = worst_integral.max(e.report.lhs);
        }
    }
    let pass = fails == 0 && integral >= 50 && worst_integral <= PINCH_INTEGRAL_TOL;
    Outcome {
        id: 2,
        pass,
        title: "pinching invariants and integral form",
        detail: format!(
            "200 pairs x shapes (2;2),(2,2;2,2): {checks} checks, {fails} fail; {integral} integral checks, worst {worst_integral:.2e}"
        ),
    }
}

fn two_tensor() -> Outcome {
    let res = run(cfg(SuiteKind::TwoTensor, &[2, 2], 500));
    let worst = res.reports.iter().map(|e| e.report.margin / scale(&e.report)).fold(f64::INFINITY, f64::min);
    let errors = res.summary.errors;
    let r1 = res
        .reports
        .iter()
        .filter(|e| e.report.name == "alt_two" && e.report.params.r == Some(1.0))
        .map(|e| e.report.margin.abs())
        .fold(0.0, f64::max);
    let commuting = run(SuiteConfig { generator: Generator::Commuting, ..cfg(SuiteKind::TwoTensor, &[2, 2], 100) });
    let worst_eq = commuting.reports.iter().map(|e| e.report.margin.abs() / scale(&e.report)).fold(0.0, f64::max);
    let pass = errors == 0 && worst >= -SLACK_REL && commuting.summary.errors == 0 && worst_eq <= EQUALITY_REL && r1 <= R1_TOL;
    Outcome {
        id: 3,
        pass,
        title: "two-tensor GT and ALT",
        detail: format!(
            "500 instances, {} checks, min scaled margin {worst:.2e}; commuting max |margin|/scale {worst_eq:.2e}; r=1 max |margin| {r1:.1e}",
            res.summary.total
        ),
    }
}

fn multivariate() -> Outcome {
    let res = run(cfg(SuiteKind::Multivariate, &[2, 2], 100));
    let worst = res.reports.iter().map(|e| e.report.margin / scale(&e.report)).fold(f64::INFINITY, f64::min);
    let doubling = res
        .reports
        .iter()
        .filter_map(|e| e.report.extra.get("rhs_doubling_change").and_then(|v| v.as_f64()))
        .fold(0.0, f64::max);
    let instances = res.config.n_instances * res.config.n_list.len();
    let pass = res.summary.errors == 0 && worst >= -SLACK_REL && doubling < DOUBLING_TOL && instances >= 300;
    Outcome {
        id: 4,
        pass,
        title: "multivariate ALT and GT",
        detail: format!(
            "{instances} instances (n in {:?}), {} checks, min scaled margin {worst:.2e}, max doubling change {doubling:.2e}",
            res.config.n_list, res.summary.total
        ),
    }
}

fn lie() -> Outcome {
    let res = run(cfg(SuiteKind::Lie, &[2, 2], 20));
    let slopes: Vec<f64> =
        named(&res, "lie_slope").filter_map(|e| e.report.extra.get("slope").and_then(|v| v.as_f64())).collect();
    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pass = slopes.len() == 20 && lo >= LIE_SLOPE.0 && hi <= LIE_SLOPE.1;
    Outcome {
        id: 5,
        pass,
        title: "Lie product slope",
        detail: format!("{} pairs, n = 1..256, slopes in [{lo:.3}, {hi:.3}]", slopes.len()),
    }
}

fn log_trace() -> Outcome {
    // a violation rate of ~2% needs more than the minimum 100 triples to show reliably
    let triples = run(SuiteConfig { n_list: vec![3], ..cfg(SuiteKind::LogTrace, &[2, 2], LOG_TRACE_TRIPLES) });
    let multi: Vec<&InequalityReport> = named(&triples, "log_trace_multi").map(|e| &e.report).collect();
    let fails = multi.iter().filter(|r| r.verdict == Verdict::Fail).count();
    let worst = multi.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let mut shrinking = 0;
    for i in 0..triples.config.n_instances {
        let at = |q: f64| {
            named(&triples, "log_trace_multi")
                .find(|e| e.instance == i && e.report.params.q == Some(q))
                .map(|e| e.report.margin)
        };
        if let (Some(m8), Some(m1)) = (at(0.125), at(1.0)) {
            if m8 <= m1 {
                shrinking += 1;
            }
        }
    }
    let trend = shrinking as f64 / triples.config.n_instances as f64;
    let pairs = run(SuiteConfig { n_list: vec![2], ..cfg(SuiteKind::LogTrace, &[2, 2], 100) });
    let agree = named(&pairs, "log_trace_two_agreement").map(|e| e.report.lhs).fold(0.0, f64::max);
    let chain_fail = pairs.reports.iter().filter(|e| e.report.verdict == Verdict::Fail).count();
    let pass = fails == 0 && trend >= TREND_FRACTION && agree <= CHAIN_TOL && chain_fail == 0;
    Outcome {
        id: 6,
        pass,
        title: "multivariate log-trace",
        detail: format!(
            "{LOG_TRACE_TRIPLES} triples: {fails}/{} checks violated (worst margin {worst:.3e}); q-trend {:.0}%; n=2 agreement {agree:.1e}, {chain_fail} chain fails",
            multi.len(),
            100.0 * trend
        ),
    }
}

fn entropy() -> Outcome {
    let res = run(cfg(SuiteKind::Entropy, &[2, 2], 500));
    let gap = res
        .reports
        .iter()
        .filter(|e| e.report.name.starts_with("variational_") && e.report.name != "variational_maximizer")
        .map(|e| e.report.margin)
        .fold(f64::INFINITY, f64::min);
    let g1_max = named(&res, "variational_maximizer").map(|e| e.report.lhs).fold(0.0, f64::max);
    let pass = res.summary.errors == 0 && gap >= -GAP_TOL && g1_max <= MAXIMIZER_TOL;
    Outcome {
        id: 7,
        pass,
        title: "variational relative entropy",
        detail: format!("500 draws, min gap {gap:.2e}, max |g1| at maximizer {g1_max:.2e}"),
    }
}

fn tails() -> Outcome {
    let res = run(cfg(SuiteKind::Tails, &[2, 2], 10));
    let violated = res.reports.iter().filter(|e| e.report.verdict == Verdict::Fail).count();
    let points = res.reports.len();

    let z = pauli_z();
    let models = vec![RandomTensorModel::rademacher(z.clone()).unwrap(), RandomTensorModel::rademacher(z).unwrap()];
    let quad = build_quadrature(0.0, 1e-6, DEFAULT_MAX_NODES).unwrap();
    let at_one = master_tail_bound(&models, 1.0, &quad, TailOptions::default()).unwrap().bound;
    let support = JointSupport::enumerate(&models).unwrap().unwrap();
    let tail_two = support.tail(2.0);
    let pass = violated == 0 && (at_one - 1.0).abs() <= PAULI_TOL && (tail_two - 0.5).abs() <= PAULI_TOL;
    Outcome {
        id: 8,
        pass,
        title: "master tail bound soundness",
        detail: format!(
            "{points} (instance, zeta) points, {violated} below exact tail; Pauli-z: bound(1) = {at_one:.10}, tail(2) = {tail_two}"
        ),
    }
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    for kind in SuiteKind::EACH {
        let c = SuiteConfig { n_list: vec![2, 3], ..cfg(kind, &[2, 2], 3) };
        let a = run(c.clone()).canonical_json().unwrap();
        let b = run(c).canonical_json().unwrap();
        if a != b {
            differing.push(kind.as_str());
        }
    }
    Outcome {
        id: 9,
        pass: differing.is_empty(),
        title: "deterministic reruns",
        detail: format!("{} suites rerun, differing: {differing:?}", SuiteKind::EACH.len()),
    }
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 9] =
        [algebra, pinching, two_tensor, multivariate, lie, log_trace, entropy, tails, determinism];
    let mut unexpected = 0;
    for check in criteria {
        let o = check();
        let expected_fail = KNOWN_FAILURES.contains(&o.id);
        let note = match (o.pass, expected_fail) {
            (false, true) => " (known counterexamples)",
            (true, true) => " (UNEXPECTED: listed as a known failure)",
            (false, false) => " (UNEXPECTED)",
            (true, false) => "",
        };
        if o.pass == expected_fail {
            unexpected += 1;
        }
        println!("criterion {}: {} {}: {}{note}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.title, o.detail);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria deviate from their expected outcome");
        ExitCode::FAILURE
    }
}
