//! Closed-form integrals of products of four harmonics over one period, and
//! the term-by-term expansion of the surrogate built on them.
//!
//! The expansion has `256 (N-1)^4` terms and is only practical for small
//! blocks; production code integrates on a uniform grid instead.

use std::f64::consts::PI;

use crate::envelope::HarmonicCoeffs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrigKind {
    Cos,
    Sin,
}

impl TrigKind {
    pub const ALL: [TrigKind; 2] = [TrigKind::Cos, TrigKind::Sin];

    pub fn eval(self, x: f64) -> f64 {
        match self {
            TrigKind::Cos => x.cos(),
            TrigKind::Sin => x.sin(),
        }
    }

    fn bit(self) -> usize {
        match self {
            TrigKind::Cos => 0,
            TrigKind::Sin => 1,
        }
    }
}

/// Sign table for the eight frequency combinations, one row per kind
/// pattern. Rows with an odd number of sines integrate to zero.
#[rustfmt::skip]
pub const Q_MATRIX: [[i8; 8]; 16] = [
    [0,  1,  1,  1,  1,  1,  1,  1],
    [0,  0,  0,  0,  0,  0,  0,  0],
    [0,  0,  0,  0,  0,  0,  0,  0],
    [0, -1,  1,  1, -1, -1,  1,  1],
    [0,  0,  0,  0,  0,  0,  0,  0],
    [0,  1,  1, -1,  1, -1, -1,  1],
    [0,  1, -1,  1,  1, -1,  1, -1],
    [0,  0,  0,  0,  0,  0,  0,  0],
    [0,  0,  0,  0,  0,  0,  0,  0],
    [0,  1,  1, -1, -1,  1,  1, -1],
    [0,  1, -1,  1, -1,  1, -1,  1],
    [0,  0,  0,  0,  0,  0,  0,  0],
    [0, -1, -1, -1,  1,  1,  1,  1],
    [0,  0,  0,  0,  0,  0,  0,  0],
    [0,  0,  0,  0,  0,  0,  0,  0],
    [0,  1, -1, -1, -1, -1,  1,  1],
];

/// Zero-based row of [`Q_MATRIX`] for a kind pattern.
pub fn q_row(kinds: [TrigKind; 4]) -> usize {
    8 * kinds[0].bit() + 4 * kinds[1].bit() + 2 * kinds[2].bit() + kinds[3].bit()
}

/// `int_0^{2 pi} xi1(k t) xi2(l t) xi3(m t) xi4(n t) dt` for harmonic
/// indices `k, l, m, n >= 1`.
pub fn quad_trig_integral(kinds: [TrigKind; 4], idx: [i64; 4]) -> f64 {
    let [k, l, m, n] = idx;
    let sums = [
        k + l + m + n,
        k + l - m - n,
        k + l + m - n,
        k + l - m + n,
        k - l + m + n,
        k - l - m - n,
        k - l + m - n,
        k - l - m + n,
    ];
    let row = &Q_MATRIX[q_row(kinds)];
    let hits: i32 = row
        .iter()
        .zip(sums)
        .filter(|(_, s)| *s == 0)
        .map(|(&q, _)| q as i32)
        .sum();
    PI / 4.0 * hits as f64
}

fn groups(h: &HarmonicCoeffs) -> [(&[f64], TrigKind); 4] {
    [
        (&h.gamma[0], TrigKind::Cos),
        (&h.gamma[1], TrigKind::Cos),
        (&h.gamma[2], TrigKind::Sin),
        (&h.gamma[3], TrigKind::Sin),
    ]
}

fn slope_groups(h: &HarmonicCoeffs) -> [(&[f64], TrigKind); 4] {
    [
        (&h.rho[0], TrigKind::Cos),
        (&h.rho[1], TrigKind::Cos),
        (&h.rho[2], TrigKind::Sin),
        (&h.rho[3], TrigKind::Sin),
    ]
}

fn expand(factors: [[(&[f64], TrigKind); 4]; 4]) -> f64 {
    let degree = factors[0][0].0.len();
    let mut total = 0.0;
    for a in &factors[0] {
        for b in &factors[1] {
            for c in &factors[2] {
                for d in &factors[3] {
                    let kinds = [a.1, b.1, c.1, d.1];
                    if Q_MATRIX[q_row(kinds)].iter().all(|&q| q == 0) {
                        continue;
                    }
                    for k in 1..=degree {
                        let ck = a.0[k - 1];
                        for l in 1..=degree {
                            let cl = ck * b.0[l - 1];
                            for m in 1..=degree {
                                let cm = cl * c.0[m - 1];
                                for n in 1..=degree {
                                    let w = quad_trig_integral(
                                        kinds,
                                        [k as i64, l as i64, m as i64, n as i64],
                                    );
                                    if w != 0.0 {
                                        total += cm * d.0[n - 1] * w;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    total
}

/// `I = int_0^T g^4 dt` by term-by-term expansion.
pub fn surrogate_by_expansion(h: &HarmonicCoeffs, block_duration: f64) -> f64 {
    let g = groups(h);
    block_duration / (2.0 * PI) * expand([g, g, g, g])
}

/// `dI/dA = 4 int_0^T g^3 (dg/dA) dt` by term-by-term expansion.
pub fn surrogate_slope_by_expansion(h: &HarmonicCoeffs, block_duration: f64) -> f64 {
    let g = groups(h);
    let r = slope_groups(h);
    4.0 * block_duration / (2.0 * PI) * expand([g, g, g, r])
}
