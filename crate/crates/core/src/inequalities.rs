//! Numerical checkers for the two-tensor and multivariate trace inequalities.
//!
//! Every checker returns an [`InequalityReport`]; an inequality that fails numerically is
//! a `fail` verdict, never an error. Errors are reserved for inputs outside a statement's
//! hypotheses or for numerical breakdown.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureScheme;
use crate::report::{instance_digest, verdict_tolerance, Direction, InequalityReport, Params};
use crate::spectral::{expm, log_norm_of_values, Eigh, SchattenOrder};
use crate::tensor::{identity_tensor, DenseTensor};

type CMat = DMatrix<Complex64>;

/// Relative eigenvalue floor used when a statement is extended to PSD inputs by continuity.
pub const PD_FLOOR: f64 = 1e-12;

/// Residue allowed in quantities that are real or Hermitian in exact arithmetic.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `V diag(d) V^H`.
fn sandwich(v: &CMat, d: &[Complex64]) -> CMat {
    let mut w = v.clone();
    for (j, &dj) in d.iter().enumerate() {
        for x in w.column_mut(j).iter_mut() {
            *x *= dj;
        }
    }
    w * v.adjoint()
}

fn singular_values_of(m: &CMat) -> Vec<f64> {
    m.singular_values().iter().copied().collect()
}

fn trace_of(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
fn trace_of_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn product(factors: &[CMat]) -> CMat {
    let mut it = factors.iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, f| acc * f)
}

fn common_shape(tensors: &[DenseTensor], what: &str) -> Result<()> {
    let Some(first) = tensors.first() else {
        return Err(Error::Domain(format!("{what} needs at least one tensor")));
    };
    if !first.shape().is_square() {
        return Err(Error::Shape(format!("{what} needs square tensors, got {}", first.shape())));
    }
    for t in tensors {
        if t.shape() != first.shape() {
            return Err(Error::Shape(format!("{what}: shapes {} and {} differ", first.shape(), t.shape())));
        }
    }
    Ok(())
}

fn schatten(p: f64) -> Result<SchattenOrder> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("Schatten order must be >= 1, got {p}")));
    }
    SchattenOrder::new(p)
}

fn require_theta(quad: &QuadratureScheme, theta: f64) -> Result<()> {
    if quad.theta != theta {
        return Err(Error::Domain(format!(
            "quadrature built for theta = {}, statement needs theta = {theta}",
            quad.theta
        )));
    }
    Ok(())
}

fn quad_budget(quad: &QuadratureScheme) -> f64 {
    if quad.is_dirac() {
        0.0
    } else {
        quad.error_budget
    }
}

/// Eigensystem of a PSD tensor normalized by its largest eigenvalue.
struct PsdFactor {
    vals: Vec<f64>,
    vecs: CMat,
    log_scale: f64,
}

impl PsdFactor {
    fn new(a: &DenseTensor, floor: bool) -> Result<(Self, bool)> {
        let eig = Eigh::new(a)?;
        eig.require_psd()?;
        let top = eig.max();
        if top <= 0.0 {
            return Err(Error::Domain("zero tensor has no logarithmic norm".into()));
        }
        let zero = eig.zero_tol() / top;
        let mut floored = false;
        let vals = eig
            .values()
            .iter()
            .map(|&l| {
                let v = l / top;
                if floor && v < PD_FLOOR {
                    floored = true;
                    PD_FLOOR
                } else if v <= zero {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        Ok((Self { vals, vecs: eig.vectors().clone(), log_scale: top.ln() }, floored))
    }

    /// Normalized `A^z`; zero eigenvalues map to zero (callers keep `Re z > 0`).
    fn pow(&self, z: Complex64) -> CMat {
        let d: Vec<Complex64> =
            self.vals.iter().map(|&l| if l == 0.0 { ZERO } else { (z * l.ln()).exp() }).collect();
        sandwich(&self.vecs, &d)
    }
}

/// Eigensystem of a Hermitian tensor shifted so its largest eigenvalue is zero.
struct ShiftedHermitian {
    vals: Vec<f64>,
    vecs: CMat,
    shift: f64,
}

impl ShiftedHermitian {
    fn new(h: &DenseTensor) -> Result<Self> {
        let eig = Eigh::new(h)?;
        let shift = eig.max();
        let vals = eig.values().iter().map(|&l| l - shift).collect();
        Ok(Self { vals, vecs: eig.vectors().clone(), shift })
    }

    /// `exp(z (H - shift))`.
    fn exp(&self, z: Complex64) -> CMat {
        let d: Vec<Complex64> = self.vals.iter().map(|&l| (z * l).exp()).collect();
        sandwich(&self.vecs, &d)
    }
}

/// `Tr exp(H1 + H2) <= Tr(exp(H1) exp(H2))`.
pub fn check_gt_two(h1: &DenseTensor, h2: &DenseTensor) -> Result<InequalityReport> {
    common_shape(&[h1.clone(), h2.clone()], "Golden-Thompson")?;
    let e1 = Eigh::new(h1)?;
    let e2 = Eigh::new(h2)?;
    let sum = Eigh::new(&h1.add(h2)?)?;
    let lhs: f64 = sum.values().iter().map(|l| l.exp()).sum();
    let x1 = e1.exp().to_dmatrix();
    let x2 = e2.exp().to_dmatrix();
    let rhs_c = trace_of_product(&x1, &x2);
    if rhs_c.im.abs() > 1e-10 * rhs_c.norm().max(1.0) {
        return Err(Error::Numerical(format!("Tr(e^H1 e^H2) has imaginary part {:.3e}", rhs_c.im)));
    }
    let rhs = rhs_c.re;
    let tol = verdict_tolerance(lhs, rhs, 0.0);
    Ok(InequalityReport::new("gt_two", lhs, rhs, Direction::Leq, tol)
        .with_params(Params { n: Some(2), ..Params::default() })
        .with_digest(instance_digest("gt_two", &[h1, h2])))
}

/// `A^alpha` of a PSD eigensystem; `alpha = 1` returns the symmetrized input untouched.
fn psd_power(a: &DenseTensor, eig: &Eigh, alpha: f64) -> Result<CMat> {
    if alpha == 1.0 {
        return Ok(a.hermitian_part()?.to_dmatrix());
    }
    Ok(eig.real_power(alpha)?.to_dmatrix())
}

/// `Tr X^alpha` for `X` PSD up to roundoff.
fn psd_trace_power(x: &CMat, alpha: f64) -> Result<f64> {
    let sym = (x + x.adjoint()) * Complex64::new(0.5, 0.0);
    let vals = sym.symmetric_eigen().eigenvalues;
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let mut acc = 0.0;
    for &l in vals.iter() {
        if l < -tol {
            return Err(Error::Numerical(format!("sandwich product has eigenvalue {l:.3e}")));
        }
        if l > 0.0 {
            acc += l.powf(alpha);
        }
    }
    Ok(acc)
}

/// Araki-Lieb-Thirring: `Tr (A1^{r/2} A2^r A1^{r/2})^{q/r}` against `Tr (A1^{1/2} A2 A1^{1/2})^q`,
/// `<=` for `r <= 1` and `>=` for `r >= 1`.
pub fn check_alt_two(a1: &DenseTensor, a2: &DenseTensor, r: f64, q: f64) -> Result<InequalityReport> {
    if !(r > 0.0 && r.is_finite()) || !(q > 0.0 && q.is_finite()) {
        return Err(Error::Domain(format!("ALT needs r > 0 and q > 0, got r = {r}, q = {q}")));
    }
    common_shape(&[a1.clone(), a2.clone()], "Araki-Lieb-Thirring")?;
    let e1 = Eigh::new(a1)?;
    let e2 = Eigh::new(a2)?;
    e1.require_psd()?;
    e2.require_psd()?;

    let half = psd_power(a1, &e1, 0.5)?;
    let rhs_inner = &half * psd_power(a2, &e2, 1.0)? * &half;
    let rhs = psd_trace_power(&rhs_inner, q)?;

    let lhs = if r == 1.0 {
        rhs
    } else {
        let side = psd_power(a1, &e1, r / 2.0)?;
        let inner = &side * psd_power(a2, &e2, r)? * &side;
        psd_trace_power(&inner, q / r)?
    };
    let direction = if r <= 1.0 { Direction::Leq } else { Direction::Geq };
    let tol = verdict_tolerance(lhs, rhs, 0.0);
    Ok(InequalityReport::new("alt_two", lhs, rhs, direction, tol)
        .with_params(Params { q: Some(q), r: Some(r), n: Some(2), ..Params::default() })
        .with_digest(instance_digest("alt_two", &[a1, a2])))
}

/// Multivariate ALT: `log || |prod A_k^theta|^{1/theta} ||_p <= int log ||prod A_k^{1+is}||_p rho_theta(s) ds`.
///
/// Inputs are normalized by their largest eigenvalue first; both sides shift by the same
/// constant, so the margin is scale invariant. For `theta < 1` eigenvalues are floored at
/// `PD_FLOOR * lambda_max` and the report records whether that happened.
pub fn check_alt_multi(
    a: &[DenseTensor],
    theta: f64,
    p: f64,
    quad: &QuadratureScheme,
) -> Result<InequalityReport> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Domain(format!("theta must lie in (0, 1], got {theta}")));
    }
    require_theta(quad, theta)?;
    let order = schatten(p)?;
    common_shape(a, "multivariate ALT")?;
    let mut factors = Vec::with_capacity(a.len());
    let mut floored = false;
    for ak in a {
        let (f, fl) = PsdFactor::new(ak, theta < 1.0)?;
        floored |= fl;
        factors.push(f);
    }
    let offset: f64 = factors.iter().map(|f| f.log_scale).sum();

    let (lhs, rhs) = if theta == 1.0 {
        let prod = product(&factors.iter().map(|f| f.pow(Complex64::new(1.0, 0.0))).collect::<Vec<_>>());
        let v = log_norm_of_values(&singular_values_of(&prod), order) + offset;
        (v, v)
    } else {
        let prod =
            product(&factors.iter().map(|f| f.pow(Complex64::new(theta, 0.0))).collect::<Vec<_>>());
        let inner = match order {
            SchattenOrder::Infinity => SchattenOrder::Infinity,
            SchattenOrder::Finite(p) => SchattenOrder::Finite(p / theta),
        };
        let lhs = log_norm_of_values(&singular_values_of(&prod), inner) / theta + offset;
        let rhs = quad.expectation(|s| {
            let z = Complex64::new(1.0, s);
            let prod = product(&factors.iter().map(|f| f.pow(z)).collect::<Vec<_>>());
            Ok(log_norm_of_values(&singular_values_of(&prod), order))
        })? + offset;
        (lhs, rhs)
    };
    let refs: Vec<&DenseTensor> = a.iter().collect();
    let tol = verdict_tolerance(lhs, rhs, quad_budget(quad));
    Ok(InequalityReport::new("alt_multi", lhs, rhs, Direction::Leq, tol)
        .with_params(Params { theta: Some(theta), p: Some(p), n: Some(a.len()), ..Params::default() })
        .with_quad(quad.summary())
        .with_digest(instance_digest("alt_multi", &refs))
        .with_extra("floored", floored))
}

/// `int log ||prod exp((1+is) H_k)||_p rho_0(s) ds` for Hermitian `H_k`.
fn gt_rhs(h: &[DenseTensor], order: SchattenOrder, quad: &QuadratureScheme) -> Result<f64> {
    let factors: Vec<ShiftedHermitian> = h.iter().map(ShiftedHermitian::new).collect::<Result<_>>()?;
    let offset: f64 = factors.iter().map(|f| f.shift).sum();
    let mean = quad.expectation(|s| {
        let z = Complex64::new(1.0, s);
        let prod = product(&factors.iter().map(|f| f.exp(z)).collect::<Vec<_>>());
        Ok(log_norm_of_values(&singular_values_of(&prod), order))
    })?;
    Ok(mean + offset)
}

/// Multivariate Golden-Thompson: `log ||exp(sum H_k)||_p <= int log ||prod exp((1+is)H_k)||_p rho_0`.
pub fn check_gt_multi(h: &[DenseTensor], p: f64, quad: &QuadratureScheme) -> Result<InequalityReport> {
    require_theta(quad, 0.0)?;
    let order = schatten(p)?;
    common_shape(h, "multivariate Golden-Thompson")?;
    let total = Eigh::new(&DenseTensor::sum(h)?)?;
    let top = total.max();
    let shifted: Vec<f64> = total.values().iter().map(|l| (l - top).exp()).collect();
    let lhs = log_norm_of_values(&shifted, order) + top;
    let rhs = gt_rhs(h, order, quad)?;
    let refs: Vec<&DenseTensor> = h.iter().collect();
    let tol = verdict_tolerance(lhs, rhs, quad_budget(quad));
    Ok(InequalityReport::new("gt_multi", lhs, rhs, Direction::Leq, tol)
        .with_params(Params { theta: Some(0.0), p: Some(p), n: Some(h.len()), ..Params::default() })
        .with_quad(quad.summary())
        .with_digest(instance_digest("gt_multi", &refs)))
}

/// Golden-Thompson for general tensors, with `Re(A) = (A + A^H)/2` on the right.
pub fn check_gt_multi_general(
    a: &[DenseTensor],
    p: f64,
    quad: &QuadratureScheme,
) -> Result<InequalityReport> {
    require_theta(quad, 0.0)?;
    let order = schatten(p)?;
    common_shape(a, "general Golden-Thompson")?;
    let total = DenseTensor::sum(a)?;
    // shift by the top of the numerical range so the exponential stays in range
    let c = Eigh::new(&total.hermitian_part()?)?.max();
    let shifted = total.sub(&identity_tensor(total.shape())?.scale_real(c))?;
    let lhs = log_norm_of_values(&singular_values_of(&expm(&shifted)?.to_dmatrix()), order) + c;
    let re: Vec<DenseTensor> = a.iter().map(|x| x.hermitian_part()).collect::<Result<_>>()?;
    let rhs = gt_rhs(&re, order, quad)?;
    let refs: Vec<&DenseTensor> = a.iter().collect();
    let tol = verdict_tolerance(lhs, rhs, quad_budget(quad));
    Ok(InequalityReport::new("gt_multi_general", lhs, rhs, Direction::Leq, tol)
        .with_params(Params { theta: Some(0.0), p: Some(p), n: Some(a.len()), ..Params::default() })
        .with_quad(quad.summary())
        .with_digest(instance_digest("gt_multi_general", &refs)))
}

/// `|| (prod_k exp(L_k / n))^n - exp(sum_k L_k) ||_F`.
pub fn lie_product_error(l: &[DenseTensor], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("Lie product needs n >= 1".into()));
    }
    common_shape(l, "Lie product")?;
    let inv = 1.0 / n as f64;
    let steps: Vec<CMat> =
        l.iter().map(|x| expm(&x.scale_real(inv)).map(|e| e.to_dmatrix())).collect::<Result<_>>()?;
    let step = product(&steps);
    let approx = matrix_power(&step, n);
    let exact = expm(&DenseTensor::sum(l)?)?.to_dmatrix();
    Ok((approx - exact).norm())
}

fn matrix_power(m: &CMat, mut n: usize) -> CMat {
    let mut result = CMat::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Errors below this are treated as roundoff in the Lie convergence study.
pub const LIE_ROUNDOFF_FLOOR: f64 = 1e-12;

/// Lie product errors at `n = 1, 2, 4, ..., 2^max_log2` with a least-squares log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieStudy {
    pub ns: Vec<usize>,
    pub errors: Vec<f64>,
    /// `None` when fewer than two errors clear the roundoff floor (commuting input).
    pub slope: Option<f64>,
    /// Every doubling above the floor reduced the error.
    pub monotone: bool,
}

pub fn lie_study(l: &[DenseTensor], max_log2: u32) -> Result<LieStudy> {
    let ns: Vec<usize> = (0..=max_log2).map(|k| 1usize << k).collect();
    let errors: Vec<f64> = ns.iter().map(|&n| lie_product_error(l, n)).collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(&errors)
        .filter(|(_, &e)| e > LIE_ROUNDOFF_FLOOR)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    let monotone = errors.windows(2).all(|w| w[0] <= LIE_ROUNDOFF_FLOOR || w[1] < w[0]);
    Ok(LieStudy { ns, errors, slope, monotone })
}

fn require_density(a: &DenseTensor) -> Result<Eigh> {
    let eig = Eigh::new(a)?;
    eig.require_psd()?;
    let tr: f64 = eig.values().iter().sum();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("first argument must have unit trace, got {tr}")));
    }
    Ok(eig)
}

/// `Tr A log A` with `0 log 0 = 0`.
fn neg_entropy(eig: &Eigh) -> f64 {
    let tol = eig.zero_tol();
    eig.values().iter().filter(|&&l| l > tol).map(|&l| l * l.ln()).sum()
}

/// `D(A || B) = Tr A (log A - log B)` for unit-trace PSD `A` and positive-definite `B`.
pub fn relative_entropy(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("relative entropy of {} and {}", a.shape(), b.shape())));
    }
    let ea = require_density(a)?;
    let eb = Eigh::new(b)?;
    eb.require_pd()?;
    let cross = trace_of_product(&a.to_dmatrix(), &eb.log()?.to_dmatrix());
    if cross.im.abs() > 1e-10 * cross.norm().max(1.0) {
        return Err(Error::Numerical(format!("Tr A log B has imaginary part {:.3e}", cross.im)));
    }
    Ok(neg_entropy(&ea) - cross.re)
}

/// Gaps in the two variational expressions of relative entropy and the Gibbs inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalGap {
    /// `D(A||B) - [Tr A log X - log Tr exp(log B + log X)]`
    pub g1: f64,
    /// `D(A||B) - [Tr A log X + 1 - Tr exp(log B + log X)]`
    pub g2: f64,
    /// `D(A || e^{H + log B} / Tr e^{H + log B})` with `H = log X`, the Gibbs form of `g1`
    pub g3: f64,
    pub relative_entropy: f64,
}

pub fn variational_gap(a: &DenseTensor, b: &DenseTensor, x: &DenseTensor) -> Result<VariationalGap> {
    if x.shape() != a.shape() {
        return Err(Error::Shape(format!("variational point {} vs {}", x.shape(), a.shape())));
    }
    let d = relative_entropy(a, b)?;
    let ex = Eigh::new(x)?;
    ex.require_pd()?;
    let log_x = ex.log()?;
    let log_b = Eigh::new(b)?.log()?;
    let a_log_x = trace_of_product(&a.to_dmatrix(), &log_x.to_dmatrix()).re;
    let gibbs = Eigh::new(&log_b.add(&log_x)?)?;
    let top = gibbs.max();
    let z_shifted: f64 = gibbs.values().iter().map(|l| (l - top).exp()).sum();
    let log_z = z_shifted.ln() + top;
    let z = log_z.exp();
    let sigma = gibbs.map_real(|l| (l - top).exp() / z_shifted);
    Ok(VariationalGap {
        g1: d - (a_log_x - log_z),
        g2: d - (a_log_x + 1.0 - z),
        g3: relative_entropy(a, &sigma)?,
        relative_entropy: d,
    })
}

/// `exp(log A - log B)`, the maximizer of the first variational expression.
pub fn variational_maximizer(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    let ea = Eigh::new(a)?;
    ea.require_pd()?;
    let eb = Eigh::new(b)?;
    eb.require_pd()?;
    Eigh::new(&ea.log()?.sub(&eb.log()?)?).map(|e| e.exp())
}

/// The three variational checks as reports (`lhs >= rhs` in each).
pub fn variational_reports(a: &DenseTensor, b: &DenseTensor, x: &DenseTensor) -> Result<Vec<InequalityReport>> {
    let g = variational_gap(a, b, x)?;
    let digest = instance_digest("variational", &[a, b, x]);
    let mk = |name: &str, gap: f64| {
        let rhs = g.relative_entropy - gap;
        let tol = verdict_tolerance(g.relative_entropy, rhs, 0.0);
        InequalityReport::new(name, g.relative_entropy, rhs, Direction::Geq, tol).with_digest(digest.clone())
    };
    Ok(vec![mk("variational_log", g.g1), mk("variational_linear", g.g2), mk("variational_gibbs", g.g3)])
}

/// Placement of the `A_2` exponent inside the log-trace integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogTraceVariant {
    /// `A_2^{q/2}` on both sides of `A_1^q`.
    Displayed,
    /// `A_2^{q(1 +- is)/2}`, like the other factors.
    ProofForm,
}

struct PdFactor {
    vals: Vec<f64>,
    vecs: CMat,
}

impl PdFactor {
    fn pow(&self, z: Complex64) -> CMat {
        let d: Vec<Complex64> = self.vals.iter().map(|&l| (z * l.ln()).exp()).collect();
        sandwich(&self.vecs, &d)
    }
}

/// `Tr A1 log Y` for Hermitian positive-definite `Y`, with Hermitian and realness checks.
fn trace_a_log(a1: &CMat, y: &CMat) -> Result<f64> {
    let norm = y.norm();
    let resid = (y - y.adjoint()).norm();
    if resid > IMAG_RESIDUE_TOL * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!("log argument is not Hermitian (residual {resid:.3e})")));
    }
    let sym = (y + y.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
        return Err(Error::Numerical("log argument is not positive definite".into()));
    }
    let d: Vec<Complex64> = eig.eigenvalues.iter().map(|&l| Complex64::new(l.ln(), 0.0)).collect();
    let log_y = sandwich(&eig.eigenvectors, &d);
    let t = trace_of_product(a1, &log_y);
    if t.im.abs() > IMAG_RESIDUE_TOL * (1.0 + t.re.abs()) {
        return Err(Error::Numerical(format!("Tr A1 log Y has imaginary part {:.3e}", t.im)));
    }
    Ok(t.re)
}

fn log_trace_rhs(
    a1q: &CMat,
    a1: &CMat,
    factors: &[PdFactor],
    q: f64,
    variant: LogTraceVariant,
    quad: &QuadratureScheme,
) -> Result<f64> {
    let mean = quad.expectation(|s| {
        let up = Complex64::new(q / 2.0, q * s / 2.0);
        let down = up.conj();
        // factors[0] is A_2, factors[k] is A_{k+2}
        let (e2_left, e2_right) = match variant {
            LogTraceVariant::Displayed => (Complex64::new(q / 2.0, 0.0), Complex64::new(q / 2.0, 0.0)),
            LogTraceVariant::ProofForm => (up, down),
        };
        let mut left: Vec<CMat> = factors[1..].iter().rev().map(|f| f.pow(up)).collect();
        left.push(factors[0].pow(e2_left));
        let mut right: Vec<CMat> = vec![factors[0].pow(e2_right)];
        right.extend(factors[1..].iter().map(|f| f.pow(down)));
        let y = product(&left) * a1q * product(&right);
        trace_a_log(a1, &y)
    })?;
    Ok(mean / q)
}

/// Multivariate logarithmic trace inequality, `sum_k Tr A1 log A_k >= (1/q) int Tr A1 log(...) rho_0`.
///
/// The verdict uses `variant`; the other placement of the `A_2` exponent is evaluated too and
/// reported under `extra.alt_variant_rhs` / `extra.alt_variant_margin`.
pub fn check_log_trace_multi_variant(
    a: &[DenseTensor],
    q: f64,
    quad: &QuadratureScheme,
    variant: LogTraceVariant,
) -> Result<InequalityReport> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain(format!("q must lie in (0, 1], got {q}")));
    }
    if a.len() < 2 {
        return Err(Error::Domain("log-trace inequality needs at least two tensors".into()));
    }
    require_theta(quad, 0.0)?;
    common_shape(a, "log-trace inequality")?;
    let e1 = require_density(&a[0])?;
    e1.require_pd()?;
    let a1 = a[0].hermitian_part()?.to_dmatrix();
    let mut lhs = 0.0;
    let mut factors = Vec::with_capacity(a.len() - 1);
    for (k, ak) in a.iter().enumerate() {
        let e = Eigh::new(ak)?;
        e.require_pd()?;
        let t = trace_of_product(&a1, &e.log()?.to_dmatrix());
        lhs += t.re;
        if k > 0 {
            factors.push(PdFactor { vals: e.values().to_vec(), vecs: e.vectors().clone() });
        }
    }
    let a1q = e1.real_power(q)?.to_dmatrix();
    let rhs = log_trace_rhs(&a1q, &a1, &factors, q, variant, quad)?;
    let other = match variant {
        LogTraceVariant::Displayed => LogTraceVariant::ProofForm,
        LogTraceVariant::ProofForm => LogTraceVariant::Displayed,
    };
    let alt_rhs = log_trace_rhs(&a1q, &a1, &factors, q, other, quad)?;
    let refs: Vec<&DenseTensor> = a.iter().collect();
    let tol = verdict_tolerance(lhs, rhs, quad_budget(quad));
    let name = match variant {
        LogTraceVariant::Displayed => "log_trace_multi",
        LogTraceVariant::ProofForm => "log_trace_multi_proof_form",
    };
    Ok(InequalityReport::new(name, lhs, rhs, Direction::Geq, tol)
        .with_params(Params { theta: Some(0.0), q: Some(q), n: Some(a.len()), ..Params::default() })
        .with_quad(quad.summary())
        .with_digest(instance_digest(name, &refs))
        .with_extra("alt_variant_rhs", alt_rhs)
        .with_extra("alt_variant_margin", lhs - alt_rhs))
}

pub fn check_log_trace_multi(a: &[DenseTensor], q: f64, quad: &QuadratureScheme) -> Result<InequalityReport> {
    check_log_trace_multi_variant(a, q, quad, LogTraceVariant::Displayed)
}

/// The three members of the two-matrix logarithmic trace chain
/// `(1/p) Tr A1 log(A2^{p/2} A1^p A2^{p/2}) <= Tr A1 (log A1 + log A2) <= (1/p) Tr A1 log(A1^{p/2} A2^p A1^{p/2})`.
pub fn log_trace_chain(a1: &DenseTensor, a2: &DenseTensor, p: f64) -> Result<(f64, f64, f64)> {
    let e1 = Eigh::new(a1)?;
    let e2 = Eigh::new(a2)?;
    e1.require_pd()?;
    e2.require_pd()?;
    let m1 = a1.hermitian_part()?.to_dmatrix();
    let middle = trace_of_product(&m1, &(e1.log()?.to_dmatrix() + e2.log()?.to_dmatrix())).re;
    let p1 = e1.real_power(p)?.to_dmatrix();
    let p2 = e2.real_power(p)?.to_dmatrix();
    let h1 = e1.real_power(p / 2.0)?.to_dmatrix();
    let h2 = e2.real_power(p / 2.0)?.to_dmatrix();
    let left = trace_a_log(&m1, &(&h2 * &p1 * &h2))? / p;
    let right = trace_a_log(&m1, &(&h1 * &p2 * &h1))? / p;
    Ok((left, middle, right))
}

/// `Tr` of a tensor's matricization as a real number, failing on a sizable imaginary part.
pub fn real_trace(x: &DenseTensor) -> Result<f64> {
    let t = trace_of(&x.to_dmatrix());
    if t.im.abs() > 1e-10 * t.norm().max(1.0) {
        return Err(Error::Numerical(format!("trace has imaginary part {:.3e}", t.im)));
    }
    Ok(t.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_quadrature, DEFAULT_BUDGET, DEFAULT_MAX_NODES};
    use crate::report::Verdict;

    fn real(rows: &[&[f64]]) -> DenseTensor {
        DenseTensor::from_real_rows(rows).unwrap()
    }

    fn px() -> DenseTensor {
        real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn pz() -> DenseTensor {
        real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    #[test]
    fn gt_two_pauli_closed_form() {
        let r = check_gt_two(&px(), &pz()).unwrap();
        assert!((r.lhs - 2.0 * 2f64.sqrt().cosh()).abs() < 1e-12);
        assert!((r.rhs - 2.0 * 1f64.cosh().powi(2)).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.lhs - 4.356367).abs() < 1e-6 && (r.rhs - 4.762196).abs() < 1e-6);
    }

    #[test]
    fn gt_two_commuting_equality() {
        let r = check_gt_two(&real(&[&[1.0, 0.0], &[0.0, 2.0]]), &real(&[&[3.0, 0.0], &[0.0, 4.0]])).unwrap();
        assert_eq!(r.verdict, Verdict::Equality);
    }

    #[test]
    fn alt_two_r_one_exact() {
        let a = real(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let b = real(&[&[1.0, -0.3], &[-0.3, 0.7]]);
        let r = check_alt_two(&a, &b, 1.0, 2.0).unwrap();
        assert_eq!(r.margin, 0.0);
        assert!(check_alt_two(&a, &b, 0.0, 1.0).is_err());
        assert!(check_alt_two(&a, &pz(), 0.5, 1.0).is_err());
    }

    #[test]
    fn alt_two_directions() {
        let a = real(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let b = real(&[&[1.0, -0.3], &[-0.3, 0.7]]);
        let r = check_alt_two(&a, &b, 0.5, 2.0).unwrap();
        assert_eq!(r.direction, Direction::Leq);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = check_alt_two(&a, &b, 2.0, 2.0).unwrap();
        assert_eq!(r.direction, Direction::Geq);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn alt_multi_single_factor_equality() {
        let a = real(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let q = build_quadrature(0.5, DEFAULT_BUDGET, DEFAULT_MAX_NODES).unwrap();
        let r = check_alt_multi(std::slice::from_ref(&a), 0.5, 2.0, &q).unwrap();
        assert_eq!(r.verdict, Verdict::Equality);
        assert!(check_alt_multi(&[a.clone()], 0.3, 2.0, &q).is_err());
        assert!(check_alt_multi(&[a], 0.5, 0.5, &q).is_err());
    }

    #[test]
    fn gt_multi_skew_equality() {
        let skew = DenseTensor::from_fn(crate::tensor::Shape::square(&[2]).unwrap(), |r, c| match (r, c) {
            (0, 1) => Complex64::new(0.7, 0.2),
            (1, 0) => Complex64::new(-0.7, 0.2),
            (0, 0) => Complex64::new(0.0, 0.4),
            _ => Complex64::new(0.0, -1.1),
        });
        let q = build_quadrature(0.0, DEFAULT_BUDGET, DEFAULT_MAX_NODES).unwrap();
        let r = check_gt_multi_general(&[skew.clone(), skew], 2.0, &q).unwrap();
        assert!((r.lhs - 0.5 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Equality);
    }

    #[test]
    fn lie_zero_and_commuting() {
        let z = DenseTensor::zeros(pz().shape().clone());
        assert_eq!(lie_product_error(&[z.clone(), z], 5).unwrap(), 0.0);
        let d = real(&[&[0.3, 0.0], &[0.0, -0.2]]);
        assert!(lie_product_error(&[pz(), d], 7).unwrap() < 1e-12);
        let s = lie_study(&[px(), pz()], 8).unwrap();
        let slope = s.slope.unwrap();
        assert!((-1.3..=-0.7).contains(&slope), "{slope}");
        assert!(s.monotone);
    }

    #[test]
    fn relative_entropy_diagonal() {
        let a = real(&[&[0.5, 0.0], &[0.0, 0.5]]);
        let b = real(&[&[1.0 / 3.0, 0.0], &[0.0, 2.0 / 3.0]]);
        let want = 0.5 * ((0.5f64).ln() - (1.0f64 / 3.0).ln()) + 0.5 * ((0.5f64).ln() - (2.0f64 / 3.0).ln());
        assert!((relative_entropy(&a, &b).unwrap() - want).abs() < 1e-14);
        assert!(relative_entropy(&a, &a).unwrap().abs() < 1e-15);
        assert!(relative_entropy(&b.scale_real(2.0), &a).is_err());
        // zero eigenvalue contributes nothing
        let pure = real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!((relative_entropy(&pure, &b).unwrap() + (1.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn variational_at_maximizer() {
        let a = real(&[&[0.6, 0.1], &[0.1, 0.4]]);
        let b = real(&[&[1.2, -0.3], &[-0.3, 0.5]]);
        let x = variational_maximizer(&a, &b).unwrap();
        let g = variational_gap(&a, &b, &x).unwrap();
        assert!(g.g1.abs() < 1e-10);
        assert!((g.g1 - g.g3).abs() < 1e-10);
        assert!(g.g2 >= -1e-12);
    }

    #[test]
    fn log_trace_commuting_equality() {
        let a1 = real(&[&[0.3, 0.0], &[0.0, 0.7]]);
        let a2 = real(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let a3 = real(&[&[1.5, 0.0], &[0.0, 3.0]]);
        let quad = build_quadrature(0.0, DEFAULT_BUDGET, DEFAULT_MAX_NODES).unwrap();
        for q in [1.0, 0.5, 0.125] {
            let r = check_log_trace_multi(&[a1.clone(), a2.clone(), a3.clone()], q, &quad).unwrap();
            assert_eq!(r.verdict, Verdict::Equality, "q={q}: {r:?}");
        }
    }

    #[test]
    fn log_trace_two_matches_chain() {
        let a1 = real(&[&[0.6, 0.2], &[0.2, 0.4]]);
        let a2 = real(&[&[1.3, -0.5], &[-0.5, 0.9]]);
        let quad = build_quadrature(0.0, DEFAULT_BUDGET, DEFAULT_MAX_NODES).unwrap();
        let r = check_log_trace_multi(&[a1.clone(), a2.clone()], 0.5, &quad).unwrap();
        let (left, middle, right) = log_trace_chain(&a1, &a2, 0.5).unwrap();
        assert!((r.lhs - middle).abs() < 1e-12);
        assert!((r.rhs - left).abs() < 1e-8);
        assert!(left <= middle && middle <= right);
    }
}
