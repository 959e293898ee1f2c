//! Envelope power, PAPR, and the fourth-power surrogate.
//!
//! For a block `s` the instantaneous power of the continuous-time signal is
//! `|x(t)|^2 = (1/N) sum |s[k]|^2 + (2/N) g(t)`, where `g` is a real
//! trigonometric polynomial of degree `N - 1` whose coefficients depend on the
//! angle only through `A_alpha`. PAPR then reduces to
//! `1 + 2 max g / sum |s|^2`, and `I = int_0^T g^4 dt` is a smooth proxy for
//! `max g` whose derivative brackets the PAPR minima.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::frft::{idfrft, inverse_plan, ComplexBlock, FrfdmParams, Grid, C64};

/// Blocks with total energy below this are rejected.
pub const MIN_BLOCK_ENERGY: f64 = 1e-30;

/// Lag products `s[m+p] s*[m]`, split into real (`lambda`) and imaginary
/// (`mu`) parts. Row `p - 1` holds `m = 0 ..= N - 1 - p`.
#[derive(Debug, Clone)]
pub struct EnvelopeCoeffs {
    n: usize,
    lambda: Vec<Vec<f64>>,
    mu: Vec<Vec<f64>>,
    mean_power_sum: f64,
}

impl EnvelopeCoeffs {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `lambda_{m,p}`; `None` outside `1 <= p <= N-1`, `m <= N-1-p`.
    pub fn lambda(&self, m: usize, p: usize) -> Option<f64> {
        self.lambda.get(p.checked_sub(1)?)?.get(m).copied()
    }

    pub fn mu(&self, m: usize, p: usize) -> Option<f64> {
        self.mu.get(p.checked_sub(1)?)?.get(m).copied()
    }

    /// `sum_k |s[k]|^2`.
    pub fn mean_power_sum(&self) -> f64 {
        self.mean_power_sum
    }
}

pub fn envelope_coeffs(s: &ComplexBlock) -> Result<EnvelopeCoeffs> {
    if s.grid() != Grid::Fractional {
        return Err(Error::invalid("s", "envelope coefficients need fractional-domain symbols"));
    }
    let v = s.values();
    let n = v.len();
    if n < 2 {
        return Err(Error::invalid("s", "need at least two symbols"));
    }
    let mut lambda = Vec::with_capacity(n - 1);
    let mut mu = Vec::with_capacity(n - 1);
    for p in 1..n {
        let (re, im): (Vec<f64>, Vec<f64>) = (0..n - p)
            .map(|m| {
                let c = v[m + p] * v[m].conj();
                (c.re, c.im)
            })
            .unzip();
        lambda.push(re);
        mu.push(im);
    }
    Ok(EnvelopeCoeffs {
        n,
        lambda,
        mu,
        mean_power_sum: s.energy(),
    })
}

/// The harmonic coefficients `gamma^(1..4)` of `g` and their derivatives
/// `rho^(1..4)` with respect to `A_alpha`, indexed by `p - 1`.
#[derive(Debug, Clone)]
pub struct HarmonicCoeffs {
    pub gamma: [Vec<f64>; 4],
    pub rho: [Vec<f64>; 4],
    pub a_alpha: f64,
}

impl HarmonicCoeffs {
    pub fn zeros(n: usize) -> Self {
        let z = vec![0.0; n.saturating_sub(1)];
        Self {
            gamma: [z.clone(), z.clone(), z.clone(), z.clone()],
            rho: [z.clone(), z.clone(), z.clone(), z],
            a_alpha: 0.0,
        }
    }

    /// Highest harmonic, `N - 1`.
    pub fn degree(&self) -> usize {
        self.gamma[0].len()
    }

    /// Cosine coefficients of `g`: `gamma^(1) + gamma^(2)`.
    pub fn cos_coeffs(&self) -> Vec<f64> {
        add(&self.gamma[0], &self.gamma[1])
    }

    /// Sine coefficients of `g`: `gamma^(3) + gamma^(4)`.
    pub fn sin_coeffs(&self) -> Vec<f64> {
        add(&self.gamma[2], &self.gamma[3])
    }

    /// Cosine coefficients of `dg/dA`.
    pub fn cos_slope(&self) -> Vec<f64> {
        add(&self.rho[0], &self.rho[1])
    }

    /// Sine coefficients of `dg/dA`.
    pub fn sin_slope(&self) -> Vec<f64> {
        add(&self.rho[2], &self.rho[3])
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Evaluates all eight coefficient vectors at `a_alpha`, with
/// `beta_{m,p} = p (2m + p) A`.
pub fn harmonic_coeffs(env: &EnvelopeCoeffs, a_alpha: f64) -> HarmonicCoeffs {
    let mut h = HarmonicCoeffs::zeros(env.n);
    h.a_alpha = a_alpha;
    for p in 1..env.n {
        let pf = p as f64;
        // exp(j beta) for m = 0, advanced by exp(j 2 p A) per step in m
        let mut rot = C64::from_polar(1.0, pf * pf * a_alpha);
        let step = C64::from_polar(1.0, 2.0 * pf * a_alpha);
        let (mut g1, mut g2, mut g3, mut g4) = (0.0, 0.0, 0.0, 0.0);
        let (mut r1, mut r2, mut r3, mut r4) = (0.0, 0.0, 0.0, 0.0);
        for (m, (&lam, &mu)) in env.lambda[p - 1].iter().zip(&env.mu[p - 1]).enumerate() {
            let (cb, sb) = (rot.re, rot.im);
            let w = pf * (2 * m + p) as f64;
            g1 += lam * cb;
            g2 -= mu * sb;
            g3 -= lam * sb;
            g4 -= mu * cb;
            r1 -= w * lam * sb;
            r2 -= w * mu * cb;
            r3 -= w * lam * cb;
            r4 += w * mu * sb;
            rot *= step;
        }
        let i = p - 1;
        h.gamma[0][i] = g1;
        h.gamma[1][i] = g2;
        h.gamma[2][i] = g3;
        h.gamma[3][i] = g4;
        h.rho[0][i] = r1;
        h.rho[1][i] = r2;
        h.rho[2][i] = r3;
        h.rho[3][i] = r4;
    }
    h
}

/// Evaluates two real trigonometric polynomials
/// `f(t) = sum_p a_p cos(2 pi p t / T) + b_p sin(2 pi p t / T)` on the
/// uniform grid `t_m = m T / points`, sharing one inverse FFT.
pub fn eval_trig_pair(
    first: (&[f64], &[f64]),
    second: (&[f64], &[f64]),
    points: usize,
) -> (Vec<f64>, Vec<f64>) {
    let degree = first.0.len();
    if points < 2 * degree + 1 {
        return (
            eval_trig_direct(first.0, first.1, points),
            eval_trig_direct(second.0, second.1, points),
        );
    }
    let mut spec = vec![C64::new(0.0, 0.0); points];
    let j = C64::new(0.0, 1.0);
    for p in 1..=degree {
        let h1 = C64::new(first.0[p - 1], -first.1[p - 1]) * 0.5;
        let h2 = C64::new(second.0[p - 1], -second.1[p - 1]) * 0.5;
        spec[p] += h1 + j * h2;
        spec[points - p] += h1.conj() + j * h2.conj();
    }
    inverse_plan(points).process(&mut spec);
    spec.iter().map(|v| (v.re, v.im)).unzip()
}

fn eval_trig_direct(a: &[f64], b: &[f64], points: usize) -> Vec<f64> {
    (0..points)
        .map(|m| {
            let u = 2.0 * PI * m as f64 / points as f64;
            a.iter()
                .zip(b)
                .enumerate()
                .map(|(i, (&c, &s))| {
                    let (sn, cs) = ((i + 1) as f64 * u).sin_cos();
                    c * cs + s * sn
                })
                .sum()
        })
        .collect()
}

/// `g` on a uniform grid of `points` samples over one block.
pub fn g_on_grid(h: &HarmonicCoeffs, points: usize) -> Vec<f64> {
    let c = h.cos_coeffs();
    let s = h.sin_coeffs();
    eval_trig_pair((&c, &s), (&c, &s), points).0
}

/// Smallest grid accepted by [`g_max`].
pub fn min_g_grid(n: usize) -> usize {
    8 * (n - 1)
}

/// Maximum of `g` over a uniform grid of `grid_points` samples.
pub fn g_max(h: &HarmonicCoeffs, grid_points: usize) -> Result<f64> {
    let need = min_g_grid(h.degree() + 1);
    if grid_points < need {
        return Err(Error::invalid(
            "grid_points",
            format!("{grid_points} is below the minimum of {need}"),
        ));
    }
    Ok(g_on_grid(h, grid_points)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// PAPR in dB of a sampled waveform.
pub fn papr_db_of(samples: &[C64]) -> Result<f64> {
    let (peak, total) = samples
        .iter()
        .map(|v| v.norm_sqr())
        .fold((0.0f64, 0.0f64), |(pk, sum), p| (pk.max(p), sum + p));
    if samples.is_empty() || total < MIN_BLOCK_ENERGY {
        return Err(Error::ZeroPower);
    }
    Ok(to_db(peak * samples.len() as f64 / total))
}

/// PAPR in dB of a block. Fractional-domain blocks are transformed first, so
/// the peak is taken over the `N * L` oversampled time samples.
pub fn papr_db(params: &FrfdmParams, s: &ComplexBlock) -> Result<f64> {
    match s.grid() {
        Grid::Fractional => {
            if s.energy() < MIN_BLOCK_ENERGY {
                return Err(Error::ZeroPower);
            }
            papr_db_of(idfrft(params, s)?.values())
        }
        Grid::Time => {
            s.check(params, Grid::Time)?;
            papr_db_of(s.values())
        }
    }
}

/// PAPR from the envelope expansion, `10 log10(1 + 2 max g / sum |s|^2)`.
pub fn papr_db_from_envelope(
    env: &EnvelopeCoeffs,
    h: &HarmonicCoeffs,
    grid_points: usize,
) -> Result<f64> {
    if env.mean_power_sum < MIN_BLOCK_ENERGY {
        return Err(Error::ZeroPower);
    }
    let gm = g_max(h, grid_points)?;
    Ok(to_db(1.0 + 2.0 * gm / env.mean_power_sum))
}

/// Quadrature size used for the surrogate: exact for the degree-`4(N-1)`
/// integrands involved.
pub fn surrogate_points(n: usize) -> usize {
    8 * (n - 1)
}

/// `I = int_0^T g(t)^4 dt`.
pub fn surrogate_i(h: &HarmonicCoeffs, block_duration: f64) -> f64 {
    let points = surrogate_points(h.degree() + 1);
    let g = g_on_grid(h, points);
    block_duration / points as f64 * g.iter().map(|v| v.powi(4)).sum::<f64>()
}

/// `dI/dA_alpha = int_0^T 4 g^3 (dg/dA) dt`.
pub fn surrogate_slope(h: &HarmonicCoeffs, block_duration: f64) -> f64 {
    let points = surrogate_points(h.degree() + 1);
    let (gc, gs, rc, rs) = (h.cos_coeffs(), h.sin_coeffs(), h.cos_slope(), h.sin_slope());
    let (g, dg) = eval_trig_pair((&gc, &gs), (&rc, &rs), points);
    let acc: f64 = g.iter().zip(&dg).map(|(a, b)| 4.0 * a * a * a * b).sum();
    block_duration / points as f64 * acc
}

/// `A_alpha` as a function of the angle offset.
pub fn a_alpha_at(block_duration: f64, angle_offset: f64) -> f64 {
    PI * PI * (2.0 * angle_offset).sin() / (block_duration * block_duration)
}

/// `dA_alpha / d alpha = -2 pi^2 cos(2 alpha) / T^2`.
pub fn a_alpha_rate(block_duration: f64, angle_offset: f64) -> f64 {
    2.0 * PI * PI * (2.0 * angle_offset).cos() / (block_duration * block_duration)
}

/// `I'(alpha)` at the offset `angle_offset`.
pub fn surrogate_i_prime_at(env: &EnvelopeCoeffs, block_duration: f64, angle_offset: f64) -> f64 {
    let h = harmonic_coeffs(env, a_alpha_at(block_duration, angle_offset));
    surrogate_slope(&h, block_duration) * a_alpha_rate(block_duration, angle_offset)
}

/// `I'(alpha)` at the angle carried by `params`.
pub fn surrogate_i_prime(env: &EnvelopeCoeffs, params: &FrfdmParams) -> f64 {
    let h = harmonic_coeffs(env, params.a_alpha());
    surrogate_slope(&h, params.block_duration())
        * a_alpha_rate(params.block_duration(), params.angle_offset())
}
