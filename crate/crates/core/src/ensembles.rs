//! Seeded random instance generators.
//!
//! Every generator draws from a caller-supplied RNG; [`instance_rng`] derives an
//! independent ChaCha stream per `(seed, index)` so instances can be generated in any
//! order, or in parallel, with identical results.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::tensor::{identity_tensor, DenseTensor, Shape};

/// Default shift making generated positive-definite tensors well conditioned.
pub const DEFAULT_PD_SHIFT: f64 = 1e-2;

/// RNG for instance `index` under `seed`; streams never overlap.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Entries i.i.d. complex normal with `E|z|^2 = 1`.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, shape: &Shape) -> DenseTensor {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let data = (0..shape.len()).map(|_| Complex64::new(s * normal(rng), s * normal(rng))).collect();
    DenseTensor::from_vec(shape.clone(), data).expect("finite normal draws")
}

/// `(G + G^H) / 2` for a Ginibre `G`; exactly Hermitian.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, shape: &Shape) -> DenseTensor {
    ginibre(rng, shape).hermitian_part().expect("square shape")
}

/// `G^H G / N + shift * I`.
pub fn random_pd<R: Rng + ?Sized>(rng: &mut R, shape: &Shape, shift: f64) -> DenseTensor {
    let g = ginibre(rng, shape);
    let n = shape.rows() as f64;
    let gram = g.conj_transpose().star(&g).scale_real(1.0 / n);
    let id = identity_tensor(shape).expect("square shape");
    gram.add(&id.scale_real(shift)).expect("same shape").hermitian_part().expect("square shape")
}

/// Positive-definite tensor with unit trace.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, shape: &Shape, shift: f64) -> DenseTensor {
    let a = random_pd(rng, shape, shift);
    let tr = a.trace().expect("square shape").re;
    a.scale_real(1.0 / tr)
}

/// Haar unitary from the QR factorization of a Ginibre matrix (phases fixed by `R`'s diagonal).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, shape: &Shape) -> DenseTensor {
    let g = ginibre(rng, shape).to_dmatrix();
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let n = q.ncols();
    let u = DMatrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        q[(i, j)] * phase
    });
    DenseTensor::from_dmatrix(shape.clone(), &u).expect("square shape")
}

/// `U diag(values) U^H`.
pub fn with_eigenbasis(u: &DenseTensor, values: &[f64]) -> Result<DenseTensor> {
    let d = DenseTensor::diagonal(u.shape().clone(), values)?;
    u.einstein_product(&d)?.einstein_product(&u.conj_transpose())?.hermitian_part()
}

/// Spectrum family for [`commuting_family`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumKind {
    /// Standard normal eigenvalues.
    Hermitian,
    /// Eigenvalues uniform in `[lo, hi]`, `0 < lo`.
    Positive { lo: f64, hi: f64 },
}

/// `count` tensors sharing one Haar eigenbasis, hence pairwise commuting.
pub fn commuting_family<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &Shape,
    count: usize,
    kind: SpectrumKind,
) -> Vec<DenseTensor> {
    let u = random_unitary(rng, shape);
    (0..count)
        .map(|_| {
            let vals: Vec<f64> = (0..shape.rows())
                .map(|_| match kind {
                    SpectrumKind::Hermitian => normal(rng),
                    SpectrumKind::Positive { lo, hi } => rng.random_range(lo..=hi),
                })
                .collect();
            with_eigenbasis(&u, &vals).expect("square shape")
        })
        .collect()
}

fn real_2x2(rows: [[f64; 2]; 2]) -> DenseTensor {
    DenseTensor::from_real_rows(&[&rows[0], &rows[1]]).expect("2x2")
}

pub fn pauli_x() -> DenseTensor {
    real_2x2([[0.0, 1.0], [1.0, 0.0]])
}

pub fn pauli_z() -> DenseTensor {
    real_2x2([[1.0, 0.0], [0.0, -1.0]])
}

pub fn pauli_y() -> DenseTensor {
    let shape = Shape::square(&[2]).expect("valid");
    DenseTensor::from_fn(shape, |r, c| match (r, c) {
        (0, 1) => Complex64::new(0.0, -1.0),
        (1, 0) => Complex64::new(0.0, 1.0),
        _ => Complex64::new(0.0, 0.0),
    })
}
