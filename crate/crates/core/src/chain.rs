//! Transmit and receive chain around the transform: quadratic phase, cyclic
//! prefix, one-tap equalization.
//!
//! The transmitter multiplies the oversampled time samples by
//! `exp(j theta(i))`; with the default convention this cancels the time chirp
//! of the inverse transform, so a channel that is circular over the block
//! acts on the data as a per-symbol gain `h_f[k]` whatever the angle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frft::{dfrft, fft_unitary, idfrft, ifft_unitary, ComplexBlock, FrfdmParams, C64};

/// Below this magnitude a channel bin is treated as a spectral null.
pub const MIN_CHANNEL_GAIN: f64 = 1e-12;

/// Which sample interval enters the quadratic phase on the oversampled grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaConvention {
    /// `theta(i) = i^2 cot(alpha) (T_s / L)^2 / 2`, the interval of the grid
    /// the samples actually live on.
    #[default]
    OversampledGrid,
    /// `theta(i) = i^2 cot(alpha) (T_s L)^2 / 2`. Agrees with the default only
    /// at `L = 1`; kept for comparison.
    SymbolIntervalTimesL,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Equalizer {
    #[default]
    ZeroForcing,
    /// Linear MMSE with the given per-symbol noise variance.
    Mmse { noise_variance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    /// Cyclic prefix length in symbol-rate samples; `n_cp * L` samples are
    /// prepended.
    pub n_cp: usize,
    pub theta: ThetaConvention,
    pub equalizer: Equalizer,
}

impl ChainConfig {
    pub fn new(n_cp: usize) -> Self {
        Self {
            n_cp,
            theta: ThetaConvention::default(),
            equalizer: Equalizer::default(),
        }
    }

    pub fn with_theta(mut self, theta: ThetaConvention) -> Self {
        self.theta = theta;
        self
    }

    pub fn cp_samples(&self, params: &FrfdmParams) -> usize {
        self.n_cp * params.oversample()
    }
}

/// Provenance carried alongside a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FrameMeta {
    pub block_id: u64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TxFrame {
    /// CP followed by the `N * L` phase-rotated body samples.
    pub samples: Vec<C64>,
    pub alpha_offset: f64,
    pub cp_len: usize,
    pub meta: FrameMeta,
}

impl TxFrame {
    pub fn body(&self) -> &[C64] {
        &self.samples[self.cp_len..]
    }

    pub fn cyclic_prefix(&self) -> &[C64] {
        &self.samples[..self.cp_len]
    }
}

pub fn phase_theta(params: &FrfdmParams, i: usize, convention: ThetaConvention) -> f64 {
    let ts = params.sampling_interval();
    let interval = match convention {
        ThetaConvention::OversampledGrid => ts / params.oversample() as f64,
        ThetaConvention::SymbolIntervalTimesL => ts * params.oversample() as f64,
    };
    let i = i as f64;
    0.5 * i * i * params.cot_alpha() * interval * interval
}

fn rotate(params: &FrfdmParams, convention: ThetaConvention, samples: &mut [C64], sign: f64) {
    if params.is_fourier() {
        return;
    }
    for (i, v) in samples.iter_mut().enumerate() {
        *v *= C64::from_polar(1.0, sign * phase_theta(params, i, convention));
    }
}

/// Prepends the last `cp_len` samples.
pub fn add_cyclic_prefix(body: &[C64], cp_len: usize) -> Result<Vec<C64>> {
    if cp_len > body.len() {
        return Err(Error::invalid("n_cp", "cyclic prefix longer than the block"));
    }
    let mut out = Vec::with_capacity(body.len() + cp_len);
    out.extend_from_slice(&body[body.len() - cp_len..]);
    out.extend_from_slice(body);
    Ok(out)
}

/// Wraps an already-modulated `N * L` body: phase rotation plus CP.
pub fn frame_from_body(
    params: &FrfdmParams,
    cfg: &ChainConfig,
    mut body: Vec<C64>,
    meta: FrameMeta,
) -> Result<TxFrame> {
    if body.len() != params.transform_len() {
        return Err(Error::LengthMismatch {
            expected: params.transform_len(),
            actual: body.len(),
        });
    }
    rotate(params, cfg.theta, &mut body, 1.0);
    let cp_len = cfg.cp_samples(params);
    Ok(TxFrame {
        samples: add_cyclic_prefix(&body, cp_len)?,
        alpha_offset: params.angle_offset(),
        cp_len,
        meta,
    })
}

pub fn transmit(params: &FrfdmParams, cfg: &ChainConfig, s: &ComplexBlock) -> Result<TxFrame> {
    transmit_with_meta(params, cfg, s, FrameMeta::default())
}

pub fn transmit_with_meta(
    params: &FrfdmParams,
    cfg: &ChainConfig,
    s: &ComplexBlock,
    meta: FrameMeta,
) -> Result<TxFrame> {
    let x = idfrft(params, s)?;
    frame_from_body(params, cfg, x.into_values(), meta)
}

/// Strips the CP, removes the quadratic phase and applies the forward
/// transform: `s_hat[k] = h_f[k] s[k]` for a channel within the CP.
pub fn receive_unequalized(
    params: &FrfdmParams,
    cfg: &ChainConfig,
    rx: &[C64],
) -> Result<ComplexBlock> {
    let cp_len = cfg.cp_samples(params);
    let expected = params.transform_len() + cp_len;
    if rx.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: rx.len(),
        });
    }
    let mut body = rx[cp_len..].to_vec();
    rotate(params, cfg.theta, &mut body, -1.0);
    dfrft(params, &ComplexBlock::time(body))
}

pub fn receive(
    params: &FrfdmParams,
    cfg: &ChainConfig,
    rx: &[C64],
    h_f: &[C64],
) -> Result<ComplexBlock> {
    let raw = receive_unequalized(params, cfg, rx)?;
    equalize(cfg.equalizer, raw.values(), h_f).map(ComplexBlock::fractional)
}

pub fn equalize(eq: Equalizer, raw: &[C64], h_f: &[C64]) -> Result<Vec<C64>> {
    if raw.len() != h_f.len() {
        return Err(Error::LengthMismatch {
            expected: raw.len(),
            actual: h_f.len(),
        });
    }
    match eq {
        Equalizer::ZeroForcing => {
            if let Some(index) = h_f.iter().position(|h| h.norm() < MIN_CHANNEL_GAIN) {
                return Err(Error::UnequalizableBin { index });
            }
            Ok(raw.iter().zip(h_f).map(|(y, h)| y / h).collect())
        }
        Equalizer::Mmse { noise_variance } => Ok(raw
            .iter()
            .zip(h_f)
            .map(|(y, h)| y * h.conj() / (h.norm_sqr() + noise_variance))
            .collect()),
    }
}

/// Zero-forcing that erases (sets to zero) bins below [`MIN_CHANNEL_GAIN`]
/// instead of failing. Returns the number of erased bins.
pub fn equalize_erasing(raw: &[C64], h_f: &[C64]) -> (Vec<C64>, usize) {
    let mut erased = 0;
    let out = raw
        .iter()
        .zip(h_f)
        .map(|(y, h)| {
            if h.norm() < MIN_CHANNEL_GAIN {
                erased += 1;
                C64::new(0.0, 0.0)
            } else {
                y / h
            }
        })
        .collect();
    (out, erased)
}

/// Plain CP-OFDM transmitter: zero-pad, unitary IFFT, CP.
pub fn ofdm_transmit(s: &[C64], oversample: usize, n_cp: usize) -> Result<Vec<C64>> {
    let mut buf = vec![C64::new(0.0, 0.0); s.len() * oversample];
    buf[..s.len()].copy_from_slice(s);
    ifft_unitary(&mut buf);
    add_cyclic_prefix(&buf, n_cp * oversample)
}

/// Plain CP-OFDM receiver before equalization.
pub fn ofdm_receive(rx: &[C64], n: usize, oversample: usize, n_cp: usize) -> Result<Vec<C64>> {
    let cp_len = n_cp * oversample;
    let expected = n * oversample + cp_len;
    if rx.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: rx.len(),
        });
    }
    let mut body = rx[cp_len..].to_vec();
    fft_unitary(&mut body);
    body.truncate(n);
    Ok(body)
}
