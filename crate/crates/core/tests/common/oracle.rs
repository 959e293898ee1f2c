//! Slow, direct reference computations the fast code paths are checked against.

use std::f64::consts::PI;

use frfdm::chain::{receive_unequalized, transmit, ChainConfig};
use frfdm::channels::{apply_static, ChannelRealization};
use frfdm::envelope::{envelope_coeffs, papr_db, surrogate_i_prime_at};
use frfdm::search::{initial_set, AngleSearchConfig};
use frfdm::trig::TrigKind;
use frfdm::{idfrft, ComplexBlock, FrfdmParams, C64};
use nalgebra::DMatrix;

use super::unit;

/// Direct evaluation of the oversampled kernel sum with
/// `k_alpha = sqrt((sin a + j cos a) / (N L))`.
pub fn kernel_sum(params: &FrfdmParams, s: &[C64]) -> Vec<C64> {
    let n = params.n_subcarriers();
    let len = params.transform_len();
    let cot = params.cot_alpha();
    let t_os = params.oversampled_interval();
    let du = params.du();
    let k_alpha = (C64::new(params.sin_alpha(), params.cos_alpha()) / len as f64).sqrt();
    (0..len)
        .map(|i| {
            let fi = i as f64;
            let acc: C64 = (0..n)
                .map(|k| {
                    let fk = k as f64;
                    let phase = -0.5 * fi * fi * cot * t_os * t_os - 0.5 * fk * fk * cot * du * du
                        + 2.0 * PI * ((i * k) % len) as f64 / len as f64;
                    s[k] * C64::from_polar(1.0, phase)
                })
                .sum();
            k_alpha * acc
        })
        .collect()
}

pub fn naive_dft(x: &[C64], sign: f64) -> Vec<C64> {
    let n = x.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| v * C64::from_polar(1.0, sign * 2.0 * PI * ((i * k) % n) as f64 / n as f64))
                .sum::<C64>()
                * scale
        })
        .collect()
}

pub fn transform_matrix(params: &FrfdmParams) -> DMatrix<C64> {
    let n = params.n_subcarriers();
    let mut m = DMatrix::<C64>::zeros(params.transform_len(), n);
    for k in 0..n {
        let col = idfrft(params, &ComplexBlock::fractional(unit(n, k))).unwrap();
        for (i, v) in col.values().iter().enumerate() {
            m[(i, k)] = *v;
        }
    }
    m
}

/// Largest entry of `M^H M - I`.
pub fn gram_error(m: &DMatrix<C64>) -> f64 {
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn matrix_error(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `int_0^{2 pi}` of a four-fold trigonometric product by the rectangle rule
/// on `points` nodes, exact for the harmonics involved.
pub struct TrigQuadrature {
    table: [Vec<Vec<f64>>; 2],
}

impl TrigQuadrature {
    pub fn new(max_harmonic: usize, points: usize) -> Self {
        let build = |kind: TrigKind| -> Vec<Vec<f64>> {
            (0..=max_harmonic)
                .map(|k| {
                    (0..points)
                        .map(|j| kind.eval(k as f64 * 2.0 * PI * j as f64 / points as f64))
                        .collect()
                })
                .collect()
        };
        Self { table: [build(TrigKind::Cos), build(TrigKind::Sin)] }
    }

    pub fn integral(&self, kinds: [TrigKind; 4], idx: [usize; 4]) -> f64 {
        let row = |kind: TrigKind, k: usize| match kind {
            TrigKind::Cos => &self.table[0][k],
            TrigKind::Sin => &self.table[1][k],
        };
        let (a, b, c, d) = (
            row(kinds[0], idx[0]),
            row(kinds[1], idx[1]),
            row(kinds[2], idx[2]),
            row(kinds[3], idx[3]),
        );
        let sum: f64 = (0..a.len()).map(|j| a[j] * b[j] * c[j] * d[j]).sum();
        2.0 * PI * sum / a.len() as f64
    }
}

/// Scans every fine grid point of the search range, keeps the ones where
/// `I'` goes from non-positive to non-negative inside a coarse interval that
/// itself brackets such a change, and scores the survivors by time-domain
/// PAPR. Returns the winning offset and the number of survivors.
pub fn exhaustive_search(
    s: &ComplexBlock,
    base: &FrfdmParams,
    cfg: &AngleSearchConfig,
    ratio: usize,
) -> Option<(f64, usize)> {
    let t = base.block_duration();
    let env = envelope_coeffs(s).unwrap();
    let coarse_count = initial_set(t, cfg.coarse_step).unwrap().len();
    let offset = |q: usize| (q / ratio) as f64 * cfg.coarse_step + (q % ratio) as f64 * cfg.fine_step;
    let last = coarse_count * ratio + 1;
    let d: Vec<f64> = (0..=last)
        .map(|q| surrogate_i_prime_at(&env, t, offset(q)))
        .collect();
    let coarse_ok = |i: usize| i < coarse_count && d[i * ratio] <= 0.0 && d[(i + 1) * ratio] >= 0.0;
    let mut best: Option<(f64, f64)> = None;
    let mut count = 0;
    for q in 0..=coarse_count * ratio {
        let inside = coarse_ok(q / ratio) || (q % ratio == 0 && q > 0 && coarse_ok(q / ratio - 1));
        if !(inside && d[q] <= 0.0 && d[q + 1] >= 0.0) {
            continue;
        }
        count += 1;
        let delta = offset(q);
        let papr = papr_db(&base.with_offset(delta).unwrap(), s).unwrap();
        if best.is_none_or(|(b, _)| papr < b) {
            best = Some((papr, delta));
        }
    }
    best.map(|(_, delta)| (delta, count))
}

/// Subcarrier-to-subcarrier coupling of the whole chain, probed one unit
/// symbol at a time.
pub fn end_to_end_matrix(p: &FrfdmParams, cfg: &ChainConfig, ch: &ChannelRealization) -> DMatrix<C64> {
    let n = p.n_subcarriers();
    let mut m = DMatrix::zeros(n, n);
    for l in 0..n {
        let frame = transmit(p, cfg, &ComplexBlock::fractional(unit(n, l))).unwrap();
        let rx = apply_static(&frame.samples, ch, p.oversample());
        for (k, v) in receive_unequalized(p, cfg, &rx).unwrap().values().iter().enumerate() {
            m[(k, l)] = *v;
        }
    }
    m
}

pub fn off_diagonal_fraction(m: &DMatrix<C64>) -> f64 {
    let mut off = 0.0;
    let mut total = 0.0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let e = m[(r, c)].norm_sqr();
            total += e;
            if r != c {
                off += e;
            }
        }
    }
    off / total
}
