#![allow(dead_code)]

pub mod oracle;

use frfdm::{ComplexBlock, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const T_REF: f64 = 128e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symbols<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    frfdm::modulation::gaussian_samples(n, rng)
}

pub fn random_block<R: Rng>(n: usize, rng: &mut R) -> ComplexBlock {
    ComplexBlock::fractional(random_symbols(n, rng))
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn unit(n: usize, k: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[k] = C64::new(1.0, 0.0);
    v
}

/// Circular convolution of `x` with taps at the given integer delays.
pub fn circular_convolution(x: &[C64], taps: &[(usize, C64)]) -> Vec<C64> {
    let n = x.len();
    (0..n)
        .map(|i| taps.iter().map(|&(d, g)| g * x[(i + n - d % n) % n]).sum())
        .collect()
}
