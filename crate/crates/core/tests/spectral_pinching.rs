//! Spectral calculus and pinching against closed forms and series oracles.

use num_complex::Complex64;
use proptest::prelude::*;
use tracegym_core::ensembles::{instance_rng, random_hermitian, random_pd, with_eigenbasis, random_unitary};
use tracegym_core::pinching::{fejer_transform, mu_delta_density, phase_tensors, pinch, pinch_via_integral, PinchOptions};
use tracegym_core::spectral::{
    eig_hermitian, eigcount_growth, exp_hermitian, log_positive, real_power, schatten_norm, SchattenOrder,
};
use tracegym_core::tensor::identity_tensor;
use tracegym_core::{DenseTensor, Error, Shape};

fn sq(d: &[usize]) -> Shape {
    Shape::square(d).unwrap()
}

/// Truncated Taylor series with scaling and squaring; independent of any eigensolver.
fn exp_series(h: &DenseTensor) -> DenseTensor {
    let k = 8;
    let small = h.scale_real(1.0 / f64::from(1u32 << k));
    let id = identity_tensor(h.shape()).unwrap();
    let mut term = id.clone();
    let mut sum = id;
    for n in 1..30 {
        term = term.einstein_product(&small).unwrap().scale_real(1.0 / n as f64);
        sum = sum.add(&term).unwrap();
    }
    for _ in 0..k {
        sum = sum.einstein_product(&sum).unwrap();
    }
    sum
}

#[test]
fn exponential_matches_series() {
    let h = random_hermitian(&mut instance_rng(11, 0), &sq(&[2, 2]));
    let e = exp_hermitian(&h).unwrap();
    let s = exp_series(&h);
    assert!(e.distance(&s) < 1e-11 * s.frobenius_norm());
}

#[test]
fn log_inverts_exp() {
    let a = random_pd(&mut instance_rng(11, 1), &sq(&[2, 2]), 0.1);
    let back = exp_hermitian(&log_positive(&a).unwrap()).unwrap();
    assert!(back.distance(&a) < 1e-12 * a.frobenius_norm());
}

#[test]
fn log_of_indefinite_is_domain_error() {
    let h = DenseTensor::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
    assert!(log_positive(&h).is_err());
}

#[test]
fn square_root_of_diagonal() {
    let d = DenseTensor::diagonal(sq(&[3]), &[4.0, 9.0, 0.25]).unwrap();
    let r = real_power(&d, 0.5).unwrap();
    let want = DenseTensor::diagonal(sq(&[3]), &[2.0, 3.0, 0.5]).unwrap();
    assert!(r.distance(&want) < 1e-14);
}

#[test]
fn schatten_norms_of_known_spectrum() {
    // singular values 3 and 4 in a rotated basis
    let u = random_unitary(&mut instance_rng(4, 0), &sq(&[2]));
    let x = with_eigenbasis(&u, &[3.0, -4.0]).unwrap();
    let p1 = schatten_norm(&x, SchattenOrder::new(1.0).unwrap()).unwrap();
    let p2 = schatten_norm(&x, SchattenOrder::new(2.0).unwrap()).unwrap();
    let inf = schatten_norm(&x, SchattenOrder::Infinity).unwrap();
    assert!((p1 - 7.0).abs() < 1e-12);
    assert!((p2 - 5.0).abs() < 1e-12);
    assert!((inf - 4.0).abs() < 1e-12);
    assert!((p2 - x.frobenius_norm()).abs() < 1e-12);
}

#[test]
fn eigenvalue_count_of_kronecker_square() {
    let a = DenseTensor::diagonal(sq(&[3]), &[1.0, 2.0, 4.0]).unwrap();
    let g = eigcount_growth(&a, 2).unwrap();
    let m2 = g.rows.iter().find(|r| r.m == 2).unwrap();
    // products {1, 2, 4, 4, 8, 16}
    assert_eq!(m2.distinct, 5);
    assert_eq!(m2.bound, 6);
    assert!(g.rows.iter().all(|r| r.distinct as u128 <= r.bound));
}

#[test]
fn fejer_kernel_and_transform() {
    let delta = 0.7;
    // tent transform, zero beyond delta
    assert!((fejer_transform(delta, 0.35).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(fejer_transform(delta, 0.7).unwrap(), 0.0);
    assert_eq!(fejer_transform(delta, 3.0).unwrap(), 0.0);
    // density from its defining formula
    let s = 1.3f64;
    let want = (1.0 - (delta * s).cos()) / (std::f64::consts::PI * delta * s * s);
    assert!((mu_delta_density(delta, s).unwrap() - want).abs() < 1e-14);
    assert!(matches!(mu_delta_density(0.0, 1.0), Err(Error::Domain(_))));
}

#[test]
fn pinching_equals_phase_average() {
    let s = sq(&[2, 2]);
    let u = random_unitary(&mut instance_rng(5, 0), &s);
    // a repeated eigenvalue, so only three spectral projectors
    let h = with_eigenbasis(&u, &[1.0, 1.0, -0.5, 2.0]).unwrap();
    let x = random_pd(&mut instance_rng(5, 1), &s, 0.1);
    let dec = eig_hermitian(&h, None).unwrap();
    assert_eq!(dec.len(), 3);
    let v = phase_tensors(&dec).unwrap();
    let terms: Vec<DenseTensor> =
        v.iter().map(|vk| vk.einstein_product(&x).unwrap().einstein_product(&vk.conj_transpose()).unwrap()).collect();
    let avg = DenseTensor::sum(&terms).unwrap().scale(Complex64::new(1.0 / v.len() as f64, 0.0));
    let p = pinch(&dec, &x).unwrap();
    assert!(p.distance(&avg) < 1e-13 * p.frobenius_norm());
}

#[test]
fn integral_representation_matches_projectors() {
    let s = sq(&[2, 2]);
    for k in 0..5 {
        let h = random_hermitian(&mut instance_rng(6, k), &s);
        let x = random_pd(&mut instance_rng(6, 100 + k), &s, 0.1);
        let exact = pinch(&eig_hermitian(&h, None).unwrap(), &x).unwrap();
        let r = pinch_via_integral(&h, &x, PinchOptions::default()).unwrap();
        assert!(r.tensor.distance(&exact) < 1e-6, "instance {k}: {}", r.tensor.distance(&exact));
    }
}

#[test]
fn integral_needs_two_levels() {
    let s = sq(&[2]);
    let h = identity_tensor(&s).unwrap();
    let x = random_pd(&mut instance_rng(1, 0), &s, 0.1);
    assert!(matches!(pinch_via_integral(&h, &x, PinchOptions::default()), Err(Error::DegenerateSpectrum(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pinching_is_a_trace_preserving_projection(seed in 0u64..10_000) {
        let s = sq(&[2, 2]);
        let h = random_hermitian(&mut instance_rng(seed, 0), &s);
        let x = random_pd(&mut instance_rng(seed, 1), &s, 0.01);
        let dec = eig_hermitian(&h, None).unwrap();
        let p = pinch(&dec, &x).unwrap();
        let pp = pinch(&dec, &p).unwrap();
        prop_assert!(pp.distance(&p) <= 1e-12 * p.frobenius_norm());
        prop_assert!((p.trace().unwrap() - x.trace().unwrap()).norm() <= 1e-12 * x.frobenius_norm());
        prop_assert!(p.commutator(&h).unwrap().frobenius_norm() <= 1e-11 * p.frobenius_norm() * h.frobenius_norm());
    }

    #[test]
    fn spectral_decomposition_reconstructs(seed in 0u64..10_000) {
        let h = random_hermitian(&mut instance_rng(seed, 2), &sq(&[2, 2]));
        let dec = eig_hermitian(&h, None).unwrap();
        prop_assert!(dec.reconstruct().distance(&h) <= 1e-12 * (1.0 + h.frobenius_norm()));
        prop_assert!(dec.projector_residual() <= 1e-12);
    }
}
