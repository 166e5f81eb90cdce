//! Hermitian spectral calculus on square tensors.
//!
//! Everything goes through a full eigendecomposition of the matricization; series
//! expansions only appear in tests as oracles.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{identity_tensor, DenseTensor, Shape};

/// Relative Hermitian tolerance: `||H - H^H||_F <= HERMITIAN_TOL * ||H||_F`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative tolerance below which eigenvalues of a PSD argument are treated as zero.
pub const PSD_ZERO_TOL: f64 = 1e-12;

/// Validate Hermitianity and return the symmetrized tensor `(H + H^H)/2`.
pub fn hermitian_checked(h: &DenseTensor) -> Result<DenseTensor> {
    if !h.shape().is_square() {
        return Err(Error::Shape(format!("Hermitian tensor must be square, got {}", h.shape())));
    }
    let norm = h.frobenius_norm();
    let resid = h.hermitian_residual();
    if resid > HERMITIAN_TOL * norm {
        return Err(Error::NotHermitian(if norm > 0.0 { resid / norm } else { resid }));
    }
    h.hermitian_part()
}

/// Default eigenvalue clustering tolerance `1e-8 * max(1, ||H||_F)`.
pub fn default_cluster_tol(h: &DenseTensor) -> f64 {
    1e-8 * h.frobenius_norm().max(1.0)
}

/// Raw eigensystem of a Hermitian tensor: ascending eigenvalues, orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigh {
    shape: Shape,
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Eigh {
    pub fn new(h: &DenseTensor) -> Result<Self> {
        let sym = hermitian_checked(h)?;
        let n = sym.rows();
        let eig = sym.to_dmatrix().symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("eigensolver returned non-finite eigenvalues".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { shape: sym.shape().clone(), values, vectors })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    /// `sum_i f(lambda_i) v_i v_i^H`.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> DenseTensor {
        let n = self.values.len();
        let fv: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        DenseTensor::from_fn(self.shape.clone(), |r, c| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += v[(r, k)] * fv[k] * v[(c, k)].conj();
            }
            acc
        })
    }

    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> DenseTensor {
        self.map(|l| Complex64::new(f(l), 0.0))
    }

    /// Absolute threshold under which an eigenvalue counts as zero.
    pub fn zero_tol(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        PSD_ZERO_TOL * scale.max(f64::MIN_POSITIVE)
    }

    /// Fail unless the spectrum is nonnegative up to [`Eigh::zero_tol`].
    pub fn require_psd(&self) -> Result<()> {
        let tol = self.zero_tol();
        if self.min() < -tol {
            return Err(Error::Domain(format!(
                "tensor is not positive semi-definite (min eigenvalue {:.3e})",
                self.min()
            )));
        }
        Ok(())
    }

    /// Fail unless every eigenvalue is strictly positive.
    pub fn require_pd(&self) -> Result<()> {
        if self.min() <= 0.0 || self.min() <= self.zero_tol() {
            return Err(Error::Domain(format!(
                "tensor is not positive definite (min eigenvalue {:.3e})",
                self.min()
            )));
        }
        Ok(())
    }

    /// Replace eigenvalues below `floor` by `floor`. Returns whether anything changed.
    pub fn floor_values(&mut self, floor: f64) -> bool {
        let mut changed = false;
        for v in &mut self.values {
            if *v < floor {
                *v = floor;
                changed = true;
            }
        }
        changed
    }

    /// `A^z` for a positive semi-definite `A`; zero eigenvalues map to zero when `Re z > 0`.
    pub fn complex_power(&self, z: Complex64) -> Result<DenseTensor> {
        self.require_psd()?;
        let tol = self.zero_tol();
        if z.re <= 0.0 && self.min() <= tol {
            return Err(Error::Domain(format!(
                "singular tensor raised to exponent with Re(z) = {} <= 0",
                z.re
            )));
        }
        Ok(self.map(|l| if l <= tol { Complex64::new(0.0, 0.0) } else { (z * l.ln()).exp() }))
    }

    /// Real power with the same conventions as [`Eigh::complex_power`].
    pub fn real_power(&self, alpha: f64) -> Result<DenseTensor> {
        if alpha.fract() == 0.0 && alpha.abs() < i32::MAX as f64 {
            let k = alpha as i32;
            if k < 0 && self.values.iter().any(|&l| l.abs() <= self.zero_tol()) {
                return Err(Error::Domain("singular tensor raised to a negative power".into()));
            }
            return Ok(self.map_real(|l| l.powi(k)));
        }
        self.require_psd()?;
        let tol = self.zero_tol();
        if alpha < 0.0 && self.min() <= tol {
            return Err(Error::Domain("singular tensor raised to a negative power".into()));
        }
        Ok(self.map_real(|l| if l <= tol { 0.0 } else { l.powf(alpha) }))
    }

    pub fn log(&self) -> Result<DenseTensor> {
        if self.min() <= 0.0 {
            return Err(Error::Domain(format!(
                "logarithm needs a positive spectrum (min eigenvalue {:.3e})",
                self.min()
            )));
        }
        Ok(self.map_real(f64::ln))
    }

    pub fn exp(&self) -> DenseTensor {
        self.map_real(f64::exp)
    }

    /// `exp(z H)` for complex `z`, scaled by `exp(-Re(z) * shift)`.
    ///
    /// Used to keep products of large exponentials in range.
    pub fn exp_scaled(&self, z: Complex64, shift: f64) -> DenseTensor {
        self.map(|l| (z * l - Complex64::new(z.re * shift, 0.0)).exp())
    }
}

/// Clustered spectral decomposition `H = sum_j lambda_j U_j`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<DenseTensor>,
    pub multiplicities: Vec<usize>,
    pub cluster_tol: f64,
}

impl SpectralDecomposition {
    /// Number of distinct eigenvalues `|sp(H)|`.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn shape(&self) -> &Shape {
        self.projectors[0].shape()
    }

    /// `sum_j lambda_j U_j`.
    pub fn reconstruct(&self) -> DenseTensor {
        let mut out = DenseTensor::zeros(self.shape().clone());
        for (l, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out = out.add(&p.scale_real(*l)).expect("same shape");
        }
        out
    }

    /// Max residual of `U_j U_k = delta_jk U_j` and `sum_j U_j = I`.
    pub fn projector_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (j, pj) in self.projectors.iter().enumerate() {
            for (k, pk) in self.projectors.iter().enumerate() {
                let prod = pj.star(pk);
                let target = if j == k { pj.clone() } else { DenseTensor::zeros(pj.shape().clone()) };
                worst = worst.max(prod.distance(&target));
            }
        }
        let total = DenseTensor::sum(&self.projectors).expect("non-empty");
        let id = identity_tensor(self.shape()).expect("square");
        worst.max(total.distance(&id))
    }
}

/// Eigendecomposition with single-linkage clustering of eigenvalues closer than
/// `cluster_tol` (default [`default_cluster_tol`]).
pub fn eig_hermitian(h: &DenseTensor, cluster_tol: Option<f64>) -> Result<SpectralDecomposition> {
    let eig = Eigh::new(h)?;
    let tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(h));
    Ok(cluster_eigh(&eig, tol))
}

/// Group an eigensystem into spectral projectors.
pub fn cluster_eigh(eig: &Eigh, cluster_tol: f64) -> SpectralDecomposition {
    let n = eig.values.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match groups.last_mut() {
            Some(g) if eig.values[i] - eig.values[*g.last().unwrap()] <= cluster_tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let v = &eig.vectors;
    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut multiplicities = Vec::with_capacity(groups.len());
    for g in &groups {
        let mean = g.iter().map(|&i| eig.values[i]).sum::<f64>() / g.len() as f64;
        let proj = DenseTensor::from_fn(eig.shape.clone(), |r, c| {
            g.iter().map(|&k| v[(r, k)] * v[(c, k)].conj()).sum()
        });
        eigenvalues.push(mean);
        projectors.push(proj);
        multiplicities.push(g.len());
    }
    SpectralDecomposition { eigenvalues, projectors, multiplicities, cluster_tol }
}

/// Named scalar functions for the functional calculus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TensorFunction {
    Exp,
    Log,
    Pow(f64),
}

pub fn apply_spectral_function(h: &DenseTensor, f: TensorFunction) -> Result<DenseTensor> {
    if let TensorFunction::Pow(a) = f {
        if a == 1.0 {
            return hermitian_checked(h);
        }
    }
    let eig = Eigh::new(h)?;
    match f {
        TensorFunction::Exp => Ok(eig.exp()),
        TensorFunction::Log => eig.log(),
        TensorFunction::Pow(a) => eig.real_power(a),
    }
}

pub fn exp_hermitian(h: &DenseTensor) -> Result<DenseTensor> {
    apply_spectral_function(h, TensorFunction::Exp)
}

pub fn log_positive(h: &DenseTensor) -> Result<DenseTensor> {
    apply_spectral_function(h, TensorFunction::Log)
}

pub fn real_power(h: &DenseTensor, alpha: f64) -> Result<DenseTensor> {
    apply_spectral_function(h, TensorFunction::Pow(alpha))
}

/// `A^z` of a positive semi-definite tensor.
pub fn complex_power(a: &DenseTensor, z: Complex64) -> Result<DenseTensor> {
    Eigh::new(a)?.complex_power(z)
}

/// Exponential of an arbitrary square tensor (Pade scaling and squaring on the
/// matricization).
pub fn expm(x: &DenseTensor) -> Result<DenseTensor> {
    if !x.shape().is_square() {
        return Err(Error::Shape(format!("expm needs a square tensor, got {}", x.shape())));
    }
    let e = x.to_dmatrix().exp();
    if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    DenseTensor::from_dmatrix(x.shape().clone(), &e)
}

/// Schatten order `p > 0`, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SchattenOrder {
    Finite(f64),
    Infinity,
}

impl SchattenOrder {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(Error::Domain(format!("Schatten order must be > 0, got {p}")));
        }
        Ok(if p.is_infinite() { SchattenOrder::Infinity } else { SchattenOrder::Finite(p) })
    }

    pub fn value(&self) -> f64 {
        match self {
            SchattenOrder::Finite(p) => *p,
            SchattenOrder::Infinity => f64::INFINITY,
        }
    }
}

/// Singular values of the matricization, descending.
pub fn singular_values(x: &DenseTensor) -> Vec<f64> {
    let mut sv: Vec<f64> = x.to_dmatrix().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `log ||sigma||_p` computed relative to the largest singular value.
pub fn log_norm_of_values(sv: &[f64], p: SchattenOrder) -> f64 {
    let smax = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    if smax == 0.0 {
        return f64::NEG_INFINITY;
    }
    match p {
        SchattenOrder::Infinity => smax.ln(),
        SchattenOrder::Finite(p) => {
            let acc: f64 = sv.iter().map(|&s| (s / smax).powf(p)).sum();
            smax.ln() + acc.ln() / p
        }
    }
}

pub fn schatten_norm(x: &DenseTensor, p: SchattenOrder) -> Result<f64> {
    if !x.shape().is_square() {
        return Err(Error::Shape(format!("Schatten norm needs a square tensor, got {}", x.shape())));
    }
    Ok(log_norm_of_values(&singular_values(x), p).exp())
}

/// `log ||X||_p`, finite even where the norm itself would overflow.
pub fn log_schatten_norm(x: &DenseTensor, p: SchattenOrder) -> Result<f64> {
    if !x.shape().is_square() {
        return Err(Error::Shape(format!("Schatten norm needs a square tensor, got {}", x.shape())));
    }
    Ok(log_norm_of_values(&singular_values(x), p))
}

/// `|X| = (X^H X)^{1/2}`, assembled from the SVD `X = U S V^H` as `V S V^H`.
pub fn abs_tensor(x: &DenseTensor) -> Result<DenseTensor> {
    if !x.shape().is_square() {
        return Err(Error::Shape(format!("abs_tensor needs a square tensor, got {}", x.shape())));
    }
    let svd = x.to_dmatrix().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD did not return V".into()))?;
    let s = &svd.singular_values;
    let n = s.len();
    let out = DenseTensor::from_fn(x.shape().clone(), |r, c| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            // V = v_t^H, so V[r,k] = conj(v_t[k,r])
            acc += v_t[(k, r)].conj() * s[k] * v_t[(k, c)];
        }
        acc
    });
    out.hermitian_part()
}

/// `A >=_Lo B` up to `tol * (1 + ||A||_F + ||B||_F)`.
pub fn loewner_geq(a: &DenseTensor, b: &DenseTensor, tol: f64) -> Result<bool> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("Loewner comparison of {} and {}", a.shape(), b.shape())));
    }
    let diff = a.sub(b)?;
    let eig = Eigh::new(&diff)?;
    Ok(eig.min() >= -tol * (1.0 + a.frobenius_norm() + b.frobenius_norm()))
}

/// Smallest distance between distinct clustered eigenvalues.
pub fn spectral_gap(d: &SpectralDecomposition) -> Result<f64> {
    if d.len() < 2 {
        return Err(Error::DegenerateSpectrum(
            "spectral gap needs at least two distinct eigenvalues".into(),
        ));
    }
    Ok(d.eigenvalues.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
}

/// One row of the Kronecker-power eigenvalue count study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigCountRow {
    pub m: usize,
    pub distinct: usize,
    pub bound: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigCountGrowth {
    pub rows: Vec<EigCountRow>,
    /// Number of distinct eigenvalues of `A`, the alphabet size used for the bound.
    pub alphabet: usize,
    /// `N (M - 1)^(N - 1)` for cubical shapes, recorded as stated and not asserted.
    pub stated_alphabet: Option<u128>,
}

/// `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Distinct-eigenvalue counts of `A^{(x)m}` for `m = 1..=m_max` against the
/// multiset bound `C(m + e - 1, e - 1)`.
pub fn eigcount_growth(a: &DenseTensor, m_max: usize) -> Result<EigCountGrowth> {
    if m_max == 0 {
        return Err(Error::Domain("m_max must be positive".into()));
    }
    let n_flat = a.rows();
    let size = (n_flat as f64).powi(m_max as i32);
    if size > 4096.0 {
        return Err(Error::Resource(format!(
            "N_flat^m_max = {n_flat}^{m_max} exceeds 4096"
        )));
    }
    let base = eig_hermitian(a, None)?;
    let alphabet = base.len();
    let mut rows = Vec::with_capacity(m_max);
    let mut power = hermitian_checked(a)?;
    for m in 1..=m_max {
        if m > 1 {
            power = power.kronecker_product(a);
        }
        let dec = eig_hermitian(&power, None)?;
        let e = alphabet as u128;
        rows.push(EigCountRow { m, distinct: dec.len(), bound: binomial(m as u128 + e - 1, e - 1) });
    }
    let shape = a.shape();
    let stated_alphabet = shape.is_cubical().then(|| {
        let order = shape.row_dims().len() as u128;
        let ext = shape.row_dims()[0] as u128;
        ext * (order.saturating_sub(1)).pow((ext - 1) as u32)
    });
    Ok(EigCountGrowth { rows, alphabet, stated_alphabet })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(d: &[usize]) -> Shape {
        Shape::square(d).unwrap()
    }

    fn pauli_x() -> DenseTensor {
        DenseTensor::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn diagonal_clusters_repeated_eigenvalues() {
        let h = DenseTensor::diagonal(sq(&[3]), &[1.0, 1.0, 3.0]).unwrap();
        let d = eig_hermitian(&h, None).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 3.0]);
        assert_eq!(d.multiplicities, vec![2, 1]);
        assert!(d.projector_residual() < 1e-12);
        assert_eq!(spectral_gap(&d).unwrap(), 2.0);
    }

    #[test]
    fn pauli_x_spectrum() {
        let d = eig_hermitian(&pauli_x(), None).unwrap();
        assert!((d.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((d.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(d.reconstruct().distance(&pauli_x()) < 1e-13);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let a = DenseTensor::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eig_hermitian(&a, None), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn gap_examples() {
        let h = DenseTensor::diagonal(sq(&[3]), &[0.0, 0.5, 0.6]).unwrap();
        let d = eig_hermitian(&h, None).unwrap();
        assert!((spectral_gap(&d).unwrap() - 0.1).abs() < 1e-15);
        let id = identity_tensor(&sq(&[2])).unwrap();
        let d = eig_hermitian(&id, None).unwrap();
        assert!(matches!(spectral_gap(&d), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn exp_of_zero_and_diagonal() {
        let z = DenseTensor::zeros(sq(&[2, 2]));
        assert!(exp_hermitian(&z).unwrap().distance(&identity_tensor(&sq(&[2, 2])).unwrap()) < 1e-15);
        let h = DenseTensor::diagonal(sq(&[2]), &[0.0, 2f64.ln()]).unwrap();
        let e = exp_hermitian(&h).unwrap();
        assert!(e.distance(&DenseTensor::diagonal(sq(&[2]), &[1.0, 2.0]).unwrap()) < 1e-15);
    }

    #[test]
    fn log_requires_positive_spectrum() {
        let h = DenseTensor::diagonal(sq(&[2]), &[0.0, 1.0]).unwrap();
        assert!(matches!(log_positive(&h), Err(Error::Domain(_))));
        let h = DenseTensor::diagonal(sq(&[2]), &[-1.0, 1.0]).unwrap();
        assert!(matches!(real_power(&h, 0.5), Err(Error::Domain(_))));
        // integer powers are fine on indefinite spectra
        assert!(real_power(&h, 2.0).is_ok());
    }

    #[test]
    fn complex_power_cases() {
        let a = DenseTensor::diagonal(sq(&[1]), &[4.0]).unwrap();
        let r = complex_power(&a, Complex64::new(0.5, 0.0)).unwrap();
        assert!((r.at(0, 0) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let one = complex_power(&a, Complex64::new(1.0, 0.0)).unwrap();
        assert!(one.distance(&a) < 1e-14);
        let singular = DenseTensor::diagonal(sq(&[2]), &[0.0, 2.0]).unwrap();
        assert!(matches!(complex_power(&singular, Complex64::new(0.0, 1.0)), Err(Error::Domain(_))));
        let p = complex_power(&singular, Complex64::new(1.0, 3.0)).unwrap();
        assert_eq!(p.at(0, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn schatten_examples() {
        let id = identity_tensor(&sq(&[2])).unwrap();
        assert!((schatten_norm(&id, SchattenOrder::new(1.0).unwrap()).unwrap() - 2.0).abs() < 1e-15);
        assert!(SchattenOrder::new(0.0).is_err());
        assert!(SchattenOrder::new(-1.0).is_err());
        assert_eq!(SchattenOrder::new(f64::INFINITY).unwrap(), SchattenOrder::Infinity);
        let d = DenseTensor::diagonal(sq(&[3]), &[3.0, -4.0, 0.0]).unwrap();
        assert!((schatten_norm(&d, SchattenOrder::Infinity).unwrap() - 4.0).abs() < 1e-14);
        assert!((schatten_norm(&d, SchattenOrder::Finite(2.0)).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn abs_of_scalar_and_unitary() {
        let d = DenseTensor::diagonal(sq(&[1]), &[-3.0]).unwrap();
        assert!((abs_tensor(&d).unwrap().at(0, 0) - Complex64::new(3.0, 0.0)).norm() < 1e-14);
        let u = pauli_x();
        assert!(abs_tensor(&u).unwrap().distance(&identity_tensor(&sq(&[2])).unwrap()) < 1e-14);
    }

    #[test]
    fn loewner_examples() {
        let a = DenseTensor::diagonal(sq(&[2]), &[2.0, 2.0]).unwrap();
        let b = DenseTensor::diagonal(sq(&[2]), &[1.0, 3.0]).unwrap();
        assert!(loewner_geq(&a, &a, 1e-12).unwrap());
        assert!(!loewner_geq(&a, &b, 1e-12).unwrap());
        let c = DenseTensor::diagonal(sq(&[3]), &[1.0, 1.0, 1.0]).unwrap();
        assert!(loewner_geq(&a, &c, 1e-12).is_err());
    }

    #[test]
    fn eigcount_two_level() {
        let a = DenseTensor::diagonal(sq(&[2]), &[1.0, 2.0]).unwrap();
        let g = eigcount_growth(&a, 4).unwrap();
        let counts: Vec<usize> = g.rows.iter().map(|r| r.distinct).collect();
        assert_eq!(counts, vec![2, 3, 4, 5]);
        assert!(g.rows.iter().all(|r| r.distinct as u128 <= r.bound));
        let id = identity_tensor(&sq(&[2])).unwrap();
        let g = eigcount_growth(&id, 5).unwrap();
        assert!(g.rows.iter().all(|r| r.distinct == 1));
    }

    #[test]
    fn eigcount_three_level_products() {
        // products {1,2,4} x {1,2,4}: 2*2 coincides with 1*4, so five distinct values
        let a = DenseTensor::diagonal(sq(&[3]), &[1.0, 2.0, 4.0]).unwrap();
        let g = eigcount_growth(&a, 2).unwrap();
        let mut products: Vec<f64> = Vec::new();
        for x in [1.0, 2.0, 4.0] {
            for y in [1.0f64, 2.0, 4.0] {
                let p: f64 = x * y;
                if !products.iter().any(|q| (q - p).abs() < 1e-12) {
                    products.push(p);
                }
            }
        }
        assert_eq!(g.rows[1].distinct, products.len());
        assert_eq!(g.rows[1].distinct, 5);
        assert_eq!(g.rows[1].bound, 6);
    }

    #[test]
    fn eigcount_size_cap() {
        let a = DenseTensor::diagonal(sq(&[4]), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(eigcount_growth(&a, 7), Err(Error::Resource(_))));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(6, 6), 1);
    }
}
