//! Spectral pinching: the exact projector form and the Fejér-kernel integral form.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{cos_over_square_tail, gauss_legendre, pairwise_sum, PANEL_ORDER};
use crate::spectral::{default_cluster_tol, hermitian_checked, spectral_gap, Eigh, SpectralDecomposition};
use crate::tensor::DenseTensor;

/// `sum_j U_j X U_j` over the spectral projectors of `dec`.
pub fn pinch(dec: &SpectralDecomposition, x: &DenseTensor) -> Result<DenseTensor> {
    if x.shape() != dec.shape() {
        return Err(Error::Shape(format!(
            "pinching a {} tensor with respect to a {} tensor",
            x.shape(),
            dec.shape()
        )));
    }
    let mut terms = Vec::with_capacity(dec.len());
    for u in &dec.projectors {
        terms.push(u.einstein_product(x)?.einstein_product(u)?);
    }
    DenseTensor::sum(&terms)
}

/// Fejér kernel `mu(s) = (1 - cos(delta s)) / (pi delta s^2)`, a probability density whose
/// Fourier transform `max(0, 1 - |w| / delta)` vanishes exactly for `|w| >= delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchingKernel {
    delta: f64,
}

impl PinchingKernel {
    pub fn new(delta: f64) -> Result<Self> {
        if delta.is_nan() || delta <= 0.0 || !delta.is_finite() {
            return Err(Error::Domain(format!("kernel width must be positive, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn density(&self, s: f64) -> f64 {
        let x = 0.5 * self.delta * s;
        let sinc = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
        self.delta / (2.0 * PI) * sinc * sinc
    }

    /// `int mu(s) e^{i w s} ds`.
    pub fn transform(&self, omega: f64) -> f64 {
        (1.0 - omega.abs() / self.delta).max(0.0)
    }

    /// `int_{|s| > S} mu(s) cos(w s) ds`, closed form via the sine integral.
    pub fn tail_cosine_moment(&self, omega: f64, half_width: f64) -> f64 {
        let d = self.delta;
        let c = |a: f64| cos_over_square_tail(a, half_width);
        2.0 / (PI * d) * (c(omega) - 0.5 * c(omega + d) - 0.5 * c(omega - d))
    }
}

pub fn mu_delta_density(delta: f64, s: f64) -> Result<f64> {
    Ok(PinchingKernel::new(delta)?.density(s))
}

pub fn fejer_transform(delta: f64, omega: f64) -> Result<f64> {
    Ok(PinchingKernel::new(delta)?.transform(omega))
}

/// Controls for [`pinch_via_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchOptions {
    pub error_budget: f64,
    pub max_nodes: usize,
    /// Truncation in units of the kernel's first zero `2 pi / delta`.
    pub lobes: usize,
}

impl Default for PinchOptions {
    fn default() -> Self {
        Self { error_budget: 1e-6, max_nodes: 1 << 20, lobes: 4 }
    }
}

/// Outcome of the integral representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinchIntegral {
    pub tensor: DenseTensor,
    pub delta: f64,
    pub half_width: f64,
    pub nodes: usize,
    /// Kernel mass outside `[-S, S]`, added back in closed form.
    pub tail_mass: f64,
    /// Change between the last two refinements (max-abs, eigenbasis).
    pub error_estimate: f64,
}

/// Quadrature of `int e^{isH} X e^{-isH} mu_delta(s) ds` with `delta` the spectral gap of `H`.
///
/// The integrand is evaluated in the eigenbasis of `H`, where it is entrywise
/// `Y_ab e^{i s (l_a - l_b)}`; the part of the integral beyond `|s| = S` is added in
/// closed form, so only the oscillatory core is discretized.
pub fn pinch_via_integral(h: &DenseTensor, x: &DenseTensor, opts: PinchOptions) -> Result<PinchIntegral> {
    if h.shape() != x.shape() {
        return Err(Error::Shape(format!("pinching a {} tensor by a {} tensor", x.shape(), h.shape())));
    }
    let x = hermitian_checked(x)?;
    let eig = Eigh::new(h)?;
    let tol = default_cluster_tol(h);
    let levels = clustered_levels(eig.values(), tol);
    let dec = crate::spectral::cluster_eigh(&eig, tol);
    let delta = match spectral_gap(&dec) {
        Ok(d) => d,
        Err(_) => {
            return Err(Error::DegenerateSpectrum(
                "integral representation needs at least two distinct eigenvalues".into(),
            ))
        }
    };
    let kernel = PinchingKernel::new(delta)?;
    let n = levels.len();
    let v = eig.vectors();
    let y = v.adjoint() * x.to_dmatrix() * v;

    // distinct frequencies appearing in the integrand
    let mut freqs: Vec<f64> = Vec::new();
    let mut freq_of = vec![0usize; n * n];
    for a in 0..n {
        for b in 0..n {
            let w = (levels[a] - levels[b]).abs();
            let k = match freqs.iter().position(|&f| f == w) {
                Some(k) => k,
                None => {
                    freqs.push(w);
                    freqs.len() - 1
                }
            };
            freq_of[a * n + b] = k;
        }
    }
    let w_max = freqs.iter().fold(0.0f64, |m, &w| m.max(w));

    let half_width = 2.0 * PI * opts.lobes.max(1) as f64 / delta;
    let tails: Vec<f64> = freqs.iter().map(|&w| kernel.tail_cosine_moment(w, half_width)).collect();
    let tail_mass = kernel.tail_cosine_moment(0.0, half_width);

    // about one half-period of the fastest oscillation per panel to start with
    let mut panels = ((half_width * (w_max + delta) / PI).ceil() as usize).max(8);
    let mut prev = cosine_moments(&kernel, &freqs, half_width, panels);
    loop {
        panels *= 2;
        let nodes = panels * PANEL_ORDER;
        if nodes > opts.max_nodes {
            return Err(Error::Convergence(format!(
                "pinching integral needs more than {} nodes (gap {delta:.3e}, spread {w_max:.3e})",
                opts.max_nodes
            )));
        }
        let cur = cosine_moments(&kernel, &freqs, half_width, panels);
        let change = cur
            .iter()
            .zip(&prev)
            .map(|(c, p)| (c - p).abs())
            .fold(0.0f64, f64::max);
        let ymax = y.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
        let err = change * ymax;
        if err < 0.1 * opts.error_budget {
            let z = DMatrix::from_fn(n, n, |a, b| {
                let k = freq_of[a * n + b];
                y[(a, b)] * (cur[k] + tails[k])
            });
            let back = v * z * v.adjoint();
            let tensor = DenseTensor::from_dmatrix(h.shape().clone(), &back)?.hermitian_part()?;
            return Ok(PinchIntegral {
                tensor,
                delta,
                half_width,
                nodes: 2 * nodes,
                tail_mass,
                error_estimate: err,
            });
        }
        prev = cur;
    }
}

/// `int_{-S}^{S} mu(s) cos(w s) ds` for each frequency, by composite Gauss-Legendre on `[0, S]`.
fn cosine_moments(kernel: &PinchingKernel, freqs: &[f64], half_width: f64, panels: usize) -> Vec<f64> {
    let (gx, gw) = gauss_legendre(PANEL_ORDER);
    let h = half_width / panels as f64;
    let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
    let mut wmu = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in gx.iter().zip(&gw) {
            let s = mid + 0.5 * h * x;
            nodes.push(s);
            wmu.push(0.5 * h * w * kernel.density(s));
        }
    }
    freqs
        .iter()
        .map(|&f| {
            let terms: Vec<f64> = nodes.iter().zip(&wmu).map(|(&s, &w)| w * (f * s).cos()).collect();
            2.0 * pairwise_sum(&terms)
        })
        .collect()
}

/// Replace each eigenvalue by the mean of its single-linkage cluster.
fn clustered_levels(values: &[f64], tol: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            let mean = values[start..i].iter().sum::<f64>() / (i - start) as f64;
            out.extend(std::iter::repeat_n(mean, i - start));
            start = i;
        }
    }
    out
}

/// Phase tensors `V_k = sum_j exp(2 pi i j k / J) U_j`, `k = 0..J-1`.
pub fn phase_tensors(dec: &SpectralDecomposition) -> Result<Vec<DenseTensor>> {
    let j = dec.len();
    (0..j)
        .map(|k| {
            let terms: Vec<DenseTensor> = dec
                .projectors
                .iter()
                .enumerate()
                .map(|(idx, u)| {
                    let phase = Complex64::from_polar(1.0, 2.0 * PI * (idx * k) as f64 / j as f64);
                    u.scale(phase)
                })
                .collect();
            DenseTensor::sum(&terms)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;
    use crate::spectral::eig_hermitian;

    fn pauli_z() -> DenseTensor {
        DenseTensor::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }

    fn pauli_x() -> DenseTensor {
        DenseTensor::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert!((mu_delta_density(2.0 * PI, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(mu_delta_density(0.0, 1.0).is_err());
        assert!(mu_delta_density(-1.0, 1.0).is_err());
        assert_eq!(fejer_transform(1.5, 0.0).unwrap(), 1.0);
        assert_eq!(fejer_transform(1.5, 1.5).unwrap(), 0.0);
        assert_eq!(fejer_transform(1.5, -2.0).unwrap(), 0.0);
        // both forms of the density agree away from the origin
        let k = PinchingKernel::new(0.7).unwrap();
        for s in [0.3f64, 1.0, 5.0, 40.0] {
            let alt = (1.0 - (0.7 * s).cos()) / (PI * 0.7 * s * s);
            assert!((k.density(s) - alt).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_integrates_to_one() {
        // quadrature on [0, S] between kernel zeros plus closed-form tail
        let k = PinchingKernel::new(1.0).unwrap();
        let s = 2.0 * PI * 50.0;
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let panels = 400;
        let h = s / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                acc += 0.5 * h * w * k.density(mid + 0.5 * h * x);
            }
        }
        let total = 2.0 * acc + k.tail_cosine_moment(0.0, s);
        assert!((total - 1.0).abs() < 1e-10, "{total}");
        // the tail alone is roughly 2 / (pi delta S)
        assert!((k.tail_cosine_moment(0.0, s) - 2.0 / (PI * s)).abs() < 1e-6);
    }

    #[test]
    fn pinch_pauli_z_zeroes_off_diagonal() {
        let dec = eig_hermitian(&pauli_z(), None).unwrap();
        let x = DenseTensor::from_real_rows(&[&[0.3, 1.2], &[1.2, -0.7]]).unwrap();
        let p = pinch(&dec, &x).unwrap();
        assert_eq!(p.at(0, 1), Complex64::new(0.0, 0.0));
        assert_eq!(p.at(0, 0).re, 0.3);
        assert_eq!(p.at(1, 1).re, -0.7);
    }

    #[test]
    fn integral_form_on_pauli_pair() {
        let r = pinch_via_integral(&pauli_z(), &pauli_x(), PinchOptions::default()).unwrap();
        assert!(r.tensor.frobenius_norm() < 1e-6);
        assert!((r.delta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn integral_form_refuses_degenerate() {
        let h = DenseTensor::from_real_rows(&[&[2.0, 0.0], &[0.0, 2.0]]).unwrap();
        let e = pinch_via_integral(&h, &pauli_x(), PinchOptions::default());
        assert!(matches!(e, Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn integral_form_node_cap() {
        let h = DenseTensor::from_real_rows(&[&[0.0, 0.0], &[0.0, 1e-3]]).unwrap();
        let opts = PinchOptions { max_nodes: 64, ..PinchOptions::default() };
        assert!(matches!(pinch_via_integral(&h, &pauli_x(), opts), Err(Error::Convergence(_))));
    }

    #[test]
    fn clustered_levels_merge() {
        let l = clustered_levels(&[1.0, 1.0 + 1e-12, 3.0], 1e-8);
        assert_eq!(l[0], l[1]);
        assert_eq!(l[2], 3.0);
    }
}
