//! Interpolation densities on the real line and the quadrature schemes that
//! integrate against them.
//!
//! The family is
//!
//! ```text
//! rho_theta(s) = sin(pi theta) / (2 theta (cosh(pi s) + cos(pi theta)))   0 < theta < 1
//! rho_0(s)     = (pi / 2) / (cosh(pi s) + 1)
//! rho_1        = Dirac mass at s = 0
//! ```
//!
//! Both tails decay like `exp(-pi |s|)`, so a scheme truncates to `|s| <= S` using the
//! closed-form tail mass and covers `[-S, S]` with composite Gauss-Legendre panels.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points per Gauss-Legendre panel.
pub const PANEL_ORDER: usize = 16;

/// Default error budget for density quadrature.
pub const DEFAULT_BUDGET: f64 = 1e-6;

/// Default cap on quadrature nodes.
pub const DEFAULT_MAX_NODES: usize = 4097;

/// Target panel width on the s-axis before any refinement.
const INITIAL_PANEL_WIDTH: f64 = 0.5;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Pairwise (tree) summation; the reduction order depends only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Value of an interpolation density: a regular point value or the Dirac mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityValue {
    Finite(f64),
    DiracAtZero,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [0, 1], got {theta}")));
    }
    Ok(())
}

pub fn rho_theta_density(theta: f64, s: f64) -> Result<DensityValue> {
    check_theta(theta)?;
    if theta == 1.0 {
        return Ok(DensityValue::DiracAtZero);
    }
    Ok(DensityValue::Finite(rho_unchecked(theta, s)))
}

fn rho_unchecked(theta: f64, s: f64) -> f64 {
    let ch = (PI * s).cosh();
    if !ch.is_finite() {
        return 0.0;
    }
    if theta == 0.0 {
        FRAC_PI_2 / (ch + 1.0)
    } else {
        (PI * theta).sin() / (2.0 * theta * (ch + (PI * theta).cos()))
    }
}

/// Two-sided tail mass `int_{|s| > S} rho_theta(s) ds`, closed form.
pub fn rho_tail_mass(theta: f64, half_width: f64) -> Result<f64> {
    check_theta(theta)?;
    if theta == 1.0 {
        return Ok(0.0);
    }
    let e = (-PI * half_width).exp();
    // 1 - tanh(pi S / 2) = 2 e / (1 + e) with e = exp(-pi S)
    let one_minus_tanh = 2.0 * e / (1.0 + e);
    if theta == 0.0 {
        return Ok(one_minus_tanh);
    }
    // one side: (1/(pi theta)) [atan(a) - atan(a tanh)] with a = tan(pi theta / 2)
    let a = (PI * theta / 2.0).tan();
    let tanh = 1.0 - one_minus_tanh;
    let one_side = (a * one_minus_tanh / (1.0 + a * a * tanh)).atan() / (PI * theta);
    Ok(2.0 * one_side)
}

/// Compact description of a scheme, embedded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSummary {
    pub theta: f64,
    #[serde(rename = "S")]
    pub half_width: f64,
    pub nodes: usize,
    pub captured_mass: f64,
}

/// Discretization of `int f(s) rho_theta(s) ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    pub theta: f64,
    pub half_width: f64,
    pub nodes: Vec<f64>,
    /// Raw Gauss-Legendre weights; the density enters through `density`.
    pub weights: Vec<f64>,
    pub density: Vec<f64>,
    pub captured_mass: f64,
    pub error_budget: f64,
    pub panels: usize,
}

impl QuadratureScheme {
    /// Exact point mass at zero (theta = 1).
    pub fn dirac(error_budget: f64) -> Self {
        Self {
            theta: 1.0,
            half_width: 0.0,
            nodes: Vec::new(),
            weights: Vec::new(),
            density: Vec::new(),
            captured_mass: 1.0,
            error_budget,
            panels: 0,
        }
    }

    pub fn is_dirac(&self) -> bool {
        self.theta == 1.0
    }

    fn with_panels(theta: f64, half_width: f64, panels: usize, error_budget: f64) -> Self {
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let h = 2.0 * half_width / panels as f64;
        let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let mid = -half_width + (p as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        let density: Vec<f64> = nodes.iter().map(|&s| rho_unchecked(theta, s)).collect();
        let terms: Vec<f64> = weights.iter().zip(&density).map(|(w, r)| w * r).collect();
        let captured_mass = pairwise_sum(&terms);
        Self { theta, half_width, nodes, weights, density, captured_mass, error_budget, panels }
    }

    /// Same truncation, twice as many panels.
    pub fn refined(&self) -> Self {
        if self.is_dirac() {
            return self.clone();
        }
        Self::with_panels(self.theta, self.half_width, self.panels * 2, self.error_budget)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn summary(&self) -> QuadSummary {
        QuadSummary {
            theta: self.theta,
            half_width: self.half_width,
            nodes: self.nodes.len(),
            captured_mass: self.captured_mass,
        }
    }

    /// `int f rho_theta ds`, normalized by the captured mass so constants integrate exactly.
    pub fn expectation<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if self.is_dirac() {
            return f(0.0);
        }
        let mut terms = Vec::with_capacity(self.nodes.len());
        for ((&s, &w), &r) in self.nodes.iter().zip(&self.weights).zip(&self.density) {
            terms.push(w * r * f(s)?);
        }
        Ok(pairwise_sum(&terms) / self.captured_mass)
    }
}

/// Build a scheme for `rho_theta` meeting `error_budget`.
///
/// The truncation `S` is the smallest multiple of 1/8 whose tail mass is below
/// `0.1 * error_budget`; panels are doubled until the captured mass is stable to
/// `0.1 * error_budget`.
pub fn build_quadrature(theta: f64, error_budget: f64, max_nodes: usize) -> Result<QuadratureScheme> {
    check_theta(theta)?;
    if error_budget.is_nan() || error_budget <= 0.0 {
        return Err(Error::Domain(format!("error budget must be positive, got {error_budget}")));
    }
    if theta == 1.0 {
        return Ok(QuadratureScheme::dirac(error_budget));
    }
    let target = 0.1 * error_budget;
    let mut half_width = 0.125;
    while rho_tail_mass(theta, half_width)? >= target {
        half_width += 0.125;
        if half_width > 400.0 {
            return Err(Error::Convergence("density tail too heavy for the budget".into()));
        }
    }
    let mut panels = ((2.0 * half_width / INITIAL_PANEL_WIDTH).ceil() as usize).max(4);
    panels += panels % 2;
    let mut scheme = QuadratureScheme::with_panels(theta, half_width, panels, error_budget);
    loop {
        if scheme.len() > max_nodes {
            return Err(Error::Convergence(format!(
                "quadrature needs more than {max_nodes} nodes"
            )));
        }
        let finer = scheme.refined();
        if (finer.captured_mass - scheme.captured_mass).abs() < target {
            return Ok(scheme);
        }
        scheme = finer;
    }
}

/// `int_x^inf sin(t)/t dt` for `x >= 0`.
pub fn sine_integral_tail(x: f64) -> f64 {
    assert!(x >= 0.0, "sine_integral_tail needs x >= 0");
    if x <= 2.0 {
        // Si(x) by its power series
        let mut sum = 0.0;
        let mut term = x;
        let mut k = 0usize;
        loop {
            let contrib = term / (2 * k + 1) as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
            k += 1;
            term *= -x * x / ((2 * k) as f64 * (2 * k + 1) as f64);
            if k > 200 {
                break;
            }
        }
        return FRAC_PI_2 - sum;
    }
    // continued fraction for E1(ix), modified Lentz
    use num_complex::Complex64 as C;
    let tiny = 1e-300;
    let mut b = C::new(1.0, x);
    let mut c = C::new(1.0 / tiny, 0.0);
    let mut d = C::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 2..10_000usize {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += C::new(2.0, 0.0);
        d = C::new(1.0, 0.0) / (d * a + b);
        c = b + C::new(a, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del - C::new(1.0, 0.0)).norm() < 1e-16 {
            break;
        }
    }
    h *= C::new(x.cos(), -x.sin());
    -h.im
}

/// `int_S^inf cos(a s) / s^2 ds` for `a >= 0`, `S > 0`.
pub fn cos_over_square_tail(a: f64, half_width: f64) -> f64 {
    let a = a.abs();
    (a * half_width).cos() / half_width - a * sine_integral_tail(a * half_width)
}
