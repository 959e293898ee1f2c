mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::oracle::{gram_error, kernel_sum, matrix_error, naive_dft, transform_matrix};
use common::{max_abs_diff, random_block, rng, T_REF};
use frfdm::eigen::{eigen_dfrft_matrix, HermiteBasis};
use frfdm::frft::{fft_unitary, ifft_unitary};
use frfdm::{dfrft, idfrft, ComplexBlock, FrfdmParams, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn sampled_transform_is_an_isometry() {
    let mut r = rng(1);
    for &(n, l) in &[(8, 1), (64, 1), (256, 1), (16, 4), (64, 10), (128, 2)] {
        for _ in 0..2 {
            let delta = r.random_range(-1.4..1.4);
            for &t in &[T_REF, n as f64] {
                let p = FrfdmParams::new(n, l, t, delta).unwrap();
                let err = gram_error(&transform_matrix(&p));
                assert!(err <= 1e-10, "N={n} L={l} T={t} delta={delta}: {err:e}");
            }
        }
    }
}

#[test]
fn fourier_point_is_the_unitary_dft() {
    let mut r = rng(2);
    for &n in &[2usize, 5, 16, 64, 100] {
        let p = FrfdmParams::new(n, 1, T_REF, 0.0).unwrap();
        let s = random_block(n, &mut r);
        let x = idfrft(&p, &s).unwrap();
        assert!(max_abs_diff(x.values(), &naive_dft(s.values(), 1.0)) <= 1e-12);
        let back = dfrft(&p, &ComplexBlock::time(s.values().to_vec())).unwrap();
        assert!(max_abs_diff(back.values(), &naive_dft(s.values(), -1.0)) <= 1e-12);
    }
}

#[test]
fn fourier_point_with_oversampling_is_padded_ifft() {
    let mut r = rng(3);
    let p = FrfdmParams::new(16, 4, T_REF, 0.0).unwrap();
    let s = random_block(16, &mut r);
    let mut padded = s.values().to_vec();
    padded.resize(64, C64::new(0.0, 0.0));
    let reference = naive_dft(&padded, 1.0);
    assert!(max_abs_diff(idfrft(&p, &s).unwrap().values(), &reference) <= 1e-12);
}

#[test]
fn fast_path_matches_kernel_sum() {
    let mut r = rng(4);
    for n in 2..=8usize {
        for &l in &[1usize, 2, 3] {
            for &t in &[T_REF, 1.0, n as f64 * 0.7] {
                // at the reference duration the symbol chirp rate grows like
                // 1/T^2, so only offsets near the operating range keep the
                // phases small enough to compare to 1e-12
                let reach = if t < 1e-3 { 1e-8 } else { 1.5 };
                let delta = r.random_range(-reach..reach);
                let p = FrfdmParams::new(n, l, t, delta).unwrap();
                let s = random_block(n, &mut r);
                let fast = idfrft(&p, &s).unwrap();
                let direct = kernel_sum(&p, s.values());
                let err = max_abs_diff(fast.values(), &direct);
                assert!(err <= 1e-12, "N={n} L={l} T={t} delta={delta}: {err:e}");
            }
        }
    }
}

#[test]
fn loopback_small_oversampled() {
    let mut r = rng(5);
    for _ in 0..20 {
        let delta = r.random_range(-1.5..1.5);
        let p = FrfdmParams::new(4, 2, 1.0, delta).unwrap();
        let s = random_block(4, &mut r);
        let back = dfrft(&p, &idfrft(&p, &s).unwrap()).unwrap();
        assert!(max_abs_diff(back.values(), s.values()) <= 1e-10);
    }
}

#[test]
fn unitary_fft_helpers_round_trip() {
    let mut r = rng(6);
    let x = common::random_symbols(40, &mut r);
    let mut y = x.clone();
    fft_unitary(&mut y);
    assert!(max_abs_diff(&y, &naive_dft(&x, -1.0)) < 1e-12);
    ifft_unitary(&mut y);
    assert!(max_abs_diff(&y, &x) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds(seed in any::<u64>(), n in 2usize..40, l in 1usize..5, delta in -1.5f64..1.5) {
        let mut r = rng(seed);
        let p = FrfdmParams::new(n, l, T_REF, delta).unwrap();
        let s = random_block(n, &mut r);
        let x = idfrft(&p, &s).unwrap();
        prop_assert!((x.energy() - s.energy()).abs() <= 1e-10 * s.energy().max(1.0));
        let back = dfrft(&p, &x).unwrap();
        prop_assert!(max_abs_diff(back.values(), s.values()) <= 1e-10);
    }

    #[test]
    fn transform_is_linear(seed in any::<u64>(), delta in -1.5f64..1.5, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut r = rng(seed);
        let p = FrfdmParams::new(12, 3, 1.0, delta).unwrap();
        let s1 = random_block(12, &mut r);
        let s2 = random_block(12, &mut r);
        let c = C64::new(a, b);
        let mix: Vec<C64> = s1.values().iter().zip(s2.values()).map(|(x, y)| x * c + y).collect();
        let lhs = idfrft(&p, &ComplexBlock::fractional(mix)).unwrap();
        let x1 = idfrft(&p, &s1).unwrap();
        let x2 = idfrft(&p, &s2).unwrap();
        let rhs: Vec<C64> = x1.values().iter().zip(x2.values()).map(|(x, y)| x * c + y).collect();
        prop_assert!(max_abs_diff(lhs.values(), &rhs) <= 1e-12);
    }
}

fn dft_matrix(n: usize) -> DMatrix<C64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |r, c| {
        C64::from_polar(scale, -2.0 * PI * ((r * c) % n) as f64 / n as f64)
    })
}

#[test]
fn eigen_transform_is_unitary() {
    for &n in &[2usize, 3, 8, 17, 64, 256] {
        let basis = HermiteBasis::new(n);
        for &alpha in &[0.0, 0.37, FRAC_PI_2, 2.9, 5.5] {
            let err = gram_error(&basis.matrix(alpha));
            assert!(err <= 1e-10, "N={n} alpha={alpha}: {err:e}");
        }
    }
}

#[test]
fn eigen_transform_is_additive() {
    let basis = HermiteBasis::new(8);
    let f = |a: f64| basis.matrix(a);
    assert!(matrix_error(&(f(0.3) * f(0.5)), &f(0.8)) <= 1e-9);
    let mut r = rng(7);
    for _ in 0..20 {
        let a = r.random_range(0.0..2.0 * PI);
        let b = r.random_range(0.0..2.0 * PI);
        assert!(matrix_error(&(f(a) * f(b)), &f(a + b)) <= 1e-9);
    }
}

#[test]
fn eigen_transform_special_angles() {
    for &n in &[4usize, 7, 8, 16] {
        let id = DMatrix::<C64>::identity(n, n);
        assert!(matrix_error(&eigen_dfrft_matrix(n, 0.0), &id) <= 1e-12);
        assert!(matrix_error(&eigen_dfrft_matrix(n, FRAC_PI_2), &dft_matrix(n)) <= 1e-10);
        let parity = DMatrix::from_fn(n, n, |r, c| {
            C64::new(if (r + c) % n == 0 { 1.0 } else { 0.0 }, 0.0)
        });
        assert!(matrix_error(&eigen_dfrft_matrix(n, PI), &parity) <= 1e-10);
    }
}
