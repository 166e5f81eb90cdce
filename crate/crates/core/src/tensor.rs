//! Dense Einstein-product tensors.
//!
//! A tensor of shape `(I_1..I_M ; J_1..J_N)` stores its entries in row-major
//! order over the concatenated index tuple `(i_1..i_M, j_1..j_N)`. With mixed-radix
//! flattening of the row tuple and of the column tuple this is *exactly* the
//! row-major layout of the `prod(I) x prod(J)` matricization, so matricization is a
//! reinterpretation of the same buffer and round-trips bit-exactly.
//!
//! The Einstein product `A *_N B` contracts the trailing column indices of `A` with
//! the leading row indices of `B`; on matricizations it is the ordinary matrix
//! product.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row and column index ranges of a tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
}

impl Shape {
    pub fn new(row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        if row_dims.iter().chain(&col_dims).any(|&d| d == 0) {
            return Err(Error::Shape(format!(
                "dimensions must be positive, got ({row_dims:?}; {col_dims:?})"
            )));
        }
        Ok(Self { row_dims, col_dims })
    }

    /// Square shape `(dims ; dims)`.
    pub fn square(dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), dims.to_vec())
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    pub fn is_square(&self) -> bool {
        self.row_dims == self.col_dims
    }

    /// Cubical square shape: every mode has the same extent `N`.
    pub fn is_cubical(&self) -> bool {
        self.is_square() && self.row_dims.windows(2).all(|w| w[0] == w[1])
    }

    /// Flat row size `prod(I)`.
    pub fn rows(&self) -> usize {
        self.row_dims.iter().product()
    }

    /// Flat column size `prod(J)`.
    pub fn cols(&self) -> usize {
        self.col_dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Shape of the Kronecker product: row and column tuples are concatenated.
    pub fn kron(&self, other: &Shape) -> Shape {
        let mut row_dims = self.row_dims.clone();
        row_dims.extend_from_slice(&other.row_dims);
        let mut col_dims = self.col_dims.clone();
        col_dims.extend_from_slice(&other.col_dims);
        Shape { row_dims, col_dims }
    }

    pub fn transposed(&self) -> Shape {
        Shape {
            row_dims: self.col_dims.clone(),
            col_dims: self.row_dims.clone(),
        }
    }

    fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Shape(format!("{what} requires a square shape, got {self}")))
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |d: &[usize]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "({};{})", join(&self.row_dims), join(&self.col_dims))
    }
}

/// Mixed-radix row-major flat index of a multi-index.
pub fn flat_index(dims: &[usize], idx: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), idx.len());
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| {
        debug_assert!(i < d);
        acc * d + i
    })
}

/// Inverse of [`flat_index`].
pub fn multi_index(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
    out
}

/// Matricization of a tensor: a `rows x cols` complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatricizedView {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
}

impl MatricizedView {
    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    pub fn from_dmatrix(m: &DMatrix<Complex64>) -> Self {
        let (rows, cols) = m.shape();
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(m[(r, c)]);
            }
        }
        Self { rows, cols, entries }
    }
}

/// Dense complex tensor of order `M + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<Complex64>,
}

impl DenseTensor {
    pub fn from_vec(shape: Shape, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::Shape(format!(
                "shape {shape} needs {} entries, got {}",
                shape.len(),
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("tensor entries must be finite".into()));
        }
        Ok(Self { shape, data })
    }

    /// Build from real and imaginary parts in row-major order.
    pub fn from_parts(shape: Shape, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::Shape(format!(
                "re/im length mismatch: {} vs {}",
                re.len(),
                im.len()
            )));
        }
        let data = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Self::from_vec(shape, data)
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let (rows, cols) = (shape.rows(), shape.cols());
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { shape, data }
    }

    /// Square tensor from a real diagonal over the flat index.
    pub fn diagonal(shape: Shape, diag: &[f64]) -> Result<Self> {
        shape.require_square("diagonal")?;
        if diag.len() != shape.rows() {
            return Err(Error::Shape(format!(
                "diagonal of length {} does not fit {shape}",
                diag.len()
            )));
        }
        Ok(Self::from_fn(shape, |r, c| if r == c { Complex64::new(diag[r], 0.0) } else { ZERO }))
    }

    /// Shorthand for an order-2 tensor (an ordinary `n x n` matrix) from real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let shape = Shape::new(vec![n], vec![rows.first().map_or(0, |r| r.len())])?;
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0))).collect();
        Self::from_vec(shape, data)
    }

    pub fn zeros(shape: Shape) -> Self {
        let len = shape.len();
        Self { shape, data: vec![ZERO; len] }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn rows(&self) -> usize {
        self.shape.rows()
    }

    pub fn cols(&self) -> usize {
        self.shape.cols()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.data
    }

    /// Entry at flat (row, col) of the matricization.
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols() + c]
    }

    /// Entry at a full multi-index `(i_1..i_M, j_1..j_N)`.
    pub fn get(&self, row_idx: &[usize], col_idx: &[usize]) -> Complex64 {
        let r = flat_index(&self.shape.row_dims, row_idx);
        let c = flat_index(&self.shape.col_dims, col_idx);
        self.at(r, c)
    }

    pub fn matricize(&self) -> MatricizedView {
        MatricizedView { rows: self.rows(), cols: self.cols(), entries: self.data.clone() }
    }

    pub fn dematricize(view: &MatricizedView, shape: Shape) -> Result<Self> {
        if view.rows != shape.rows() || view.cols != shape.cols() {
            return Err(Error::Shape(format!(
                "{}x{} matricization does not fit shape {shape}",
                view.rows, view.cols
            )));
        }
        Self::from_vec(shape, view.entries.clone())
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows(), self.cols(), &self.data)
    }

    pub fn from_dmatrix(shape: Shape, m: &DMatrix<Complex64>) -> Result<Self> {
        Self::dematricize(&MatricizedView::from_dmatrix(m), shape)
    }

    /// Einstein product `self *_N other`, contracting self's column indices with
    /// other's row indices.
    pub fn einstein_product(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.shape.col_dims != other.shape.row_dims {
            return Err(Error::Shape(format!(
                "cannot contract {} with {}",
                self.shape, other.shape
            )));
        }
        let (n, k, m) = (self.rows(), self.cols(), other.cols());
        let mut data = vec![ZERO; n * m];
        for i in 0..n {
            let out = &mut data[i * m..(i + 1) * m];
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[l * m..(l + 1) * m];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        let shape = Shape {
            row_dims: self.shape.row_dims.clone(),
            col_dims: other.shape.col_dims.clone(),
        };
        Ok(DenseTensor { shape, data })
    }

    /// Einstein product for operands already known to be conformable.
    ///
    /// Panics on a shape mismatch; internal callers use it on tensors that share
    /// one square shape.
    pub fn star(&self, other: &DenseTensor) -> DenseTensor {
        self.einstein_product(other).expect("conformable Einstein product")
    }

    /// Product of a sequence, left to right.
    pub fn product<'a>(factors: impl IntoIterator<Item = &'a DenseTensor>) -> Result<DenseTensor> {
        let mut it = factors.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::Shape("empty product".into()))?
            .clone();
        it.try_fold(first, |acc, f| acc.einstein_product(f))
    }

    /// Conjugate transpose `A^H`.
    pub fn conj_transpose(&self) -> DenseTensor {
        let (n, m) = (self.rows(), self.cols());
        let mut data = vec![ZERO; n * m];
        for r in 0..n {
            for c in 0..m {
                data[c * n + r] = self.data[r * m + c].conj();
            }
        }
        DenseTensor { shape: self.shape.transposed(), data }
    }

    pub fn trace(&self) -> Result<Complex64> {
        self.shape.require_square("trace")?;
        Ok((0..self.rows()).map(|i| self.at(i, i)).sum())
    }

    /// `Tr(A^H * B)`.
    pub fn frobenius_inner(&self, other: &DenseTensor) -> Result<Complex64> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "inner product needs equal shapes, got {} and {}",
                self.shape, other.shape
            )));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product; row and column index tuples of `other` nest inside those of `self`.
    pub fn kronecker_product(&self, other: &DenseTensor) -> DenseTensor {
        let shape = self.shape.kron(&other.shape);
        let (br, bc) = (other.rows(), other.cols());
        let cols = shape.cols();
        let mut data = vec![ZERO; shape.len()];
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let a = self.at(i, j);
                for k in 0..br {
                    let base = (i * br + k) * cols + j * bc;
                    for l in 0..bc {
                        data[base + l] = a * other.data[k * bc + l];
                    }
                }
            }
        }
        DenseTensor { shape, data }
    }

    /// Kronecker sum `A (x) I + I (x) B` of square tensors.
    pub fn kronecker_sum(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.shape.require_square("kronecker_sum")?;
        other.shape.require_square("kronecker_sum")?;
        let left = self.kronecker_product(&identity_tensor(&other.shape)?);
        let right = identity_tensor(&self.shape)?.kronecker_product(other);
        left.add(&right)
    }

    /// m-fold Kronecker power.
    pub fn kronecker_power(&self, m: usize) -> Result<DenseTensor> {
        if m == 0 {
            return Err(Error::Domain("Kronecker power needs m >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..m {
            out = out.kronecker_product(self);
        }
        Ok(out)
    }

    fn zip_with(&self, other: &DenseTensor, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<DenseTensor> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!("shape mismatch {} vs {}", self.shape, other.shape)));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(DenseTensor { shape: self.shape.clone(), data })
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> DenseTensor {
        DenseTensor { shape: self.shape.clone(), data: self.data.iter().map(|&z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> DenseTensor {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Sum of a non-empty sequence of same-shape tensors.
    pub fn sum<'a>(terms: impl IntoIterator<Item = &'a DenseTensor>) -> Result<DenseTensor> {
        let mut it = terms.into_iter();
        let first = it.next().ok_or_else(|| Error::Shape("empty sum".into()))?.clone();
        it.try_fold(first, |acc, t| acc.add(t))
    }

    /// Hermitian part `(A + A^H) / 2`.
    pub fn hermitian_part(&self) -> Result<DenseTensor> {
        self.shape.require_square("hermitian_part")?;
        let h = self.conj_transpose();
        Ok(self.zip_with(&h, |a, b| (a + b) * 0.5).expect("square"))
    }

    /// `||A - A^H||_F`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.shape.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                acc += (self.at(r, c) - self.at(c, r).conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.shape.is_square() && self.hermitian_residual() <= rel_tol * self.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    /// Commutator `A*B - B*A`.
    pub fn commutator(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.einstein_product(other)?.sub(&other.einstein_product(self)?)
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius distance; infinite for mismatched shapes.
    pub fn distance(&self, other: &DenseTensor) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Identity tensor of a square shape.
pub fn identity_tensor(shape: &Shape) -> Result<DenseTensor> {
    shape.require_square("identity_tensor")?;
    Ok(DenseTensor::from_fn(shape.clone(), |r, c| if r == c { ONE } else { ZERO }))
}

/// JSON exchange form `{"row_dims", "col_dims", "re", "im"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorJson {
    pub row_dims: Vec<usize>,
    pub col_dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&DenseTensor> for TensorJson {
    fn from(t: &DenseTensor) -> Self {
        TensorJson {
            row_dims: t.shape.row_dims.clone(),
            col_dims: t.shape.col_dims.clone(),
            re: t.data.iter().map(|z| z.re).collect(),
            im: t.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<TensorJson> for DenseTensor {
    type Error = Error;

    fn try_from(j: TensorJson) -> Result<Self> {
        let shape = Shape::new(j.row_dims, j.col_dims)?;
        DenseTensor::from_parts(shape, &j.re, &j.im)
    }
}

impl Serialize for DenseTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TensorJson::deserialize(d)?;
        DenseTensor::try_from(j).map_err(serde::de::Error::custom)
    }
}
