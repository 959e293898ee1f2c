//! Channel models: AWGN, block-fading multipath Rayleigh, and a doubly
//! dispersive channel with per-path Doppler. Tap delays are given in
//! symbol-rate samples and land on the oversampled grid at `delay * L`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{receive_unequalized, transmit, ChainConfig, ofdm_receive, ofdm_transmit};
use crate::error::{Error, Result};
use crate::frft::{ComplexBlock, FrfdmParams, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub gain: C64,
    /// Delay in symbol-rate samples.
    pub delay: usize,
    pub doppler_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Static,
    Ltv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    taps: Vec<Tap>,
    kind: ChannelKind,
}

impl ChannelRealization {
    pub fn new(taps: Vec<Tap>, kind: ChannelKind) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("taps", "need at least one tap"));
        }
        if taps.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::invalid("taps", "delays must be strictly increasing"));
        }
        if taps.iter().any(|t| !(t.gain.re.is_finite() && t.gain.im.is_finite() && t.doppler_hz.is_finite())) {
            return Err(Error::invalid("taps", "gains and Dopplers must be finite"));
        }
        if kind == ChannelKind::Static && taps.iter().any(|t| t.doppler_hz != 0.0) {
            return Err(Error::invalid("taps", "a static channel has no Doppler"));
        }
        Ok(Self { taps, kind })
    }

    pub fn identity() -> Self {
        Self {
            taps: vec![Tap {
                gain: C64::new(1.0, 0.0),
                delay: 0,
                doppler_hz: 0.0,
            }],
            kind: ChannelKind::Static,
        }
    }

    /// Static channel from gains at delays `0, 1, 2, ...`.
    pub fn from_gains(gains: &[C64]) -> Result<Self> {
        let taps = gains
            .iter()
            .enumerate()
            .map(|(delay, &gain)| Tap {
                gain,
                delay,
                doppler_hz: 0.0,
            })
            .collect();
        Self::new(taps, ChannelKind::Static)
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn max_delay(&self) -> usize {
        self.taps.last().map_or(0, |t| t.delay)
    }

    /// The same paths with every Doppler removed.
    pub fn to_static(&self) -> Self {
        Self {
            taps: self
                .taps
                .iter()
                .map(|t| Tap {
                    doppler_hz: 0.0,
                    ..*t
                })
                .collect(),
            kind: ChannelKind::Static,
        }
    }

    pub fn validate_within_cp(&self, n_cp: usize) -> Result<()> {
        if self.max_delay() > n_cp {
            return Err(Error::invalid(
                "n_cp",
                format!("delay spread {} exceeds the cyclic prefix {n_cp}", self.max_delay()),
            ));
        }
        Ok(())
    }

    /// `h_f[k] = sum_d g_d exp(-j 2 pi d k / N)`, so the identity channel
    /// gives `h_f = 1`.
    pub fn frequency_response(&self, n: usize) -> Vec<C64> {
        (0..n)
            .map(|k| {
                self.taps
                    .iter()
                    .map(|t| {
                        let phase = -2.0 * PI * ((t.delay * k) % n) as f64 / n as f64;
                        t.gain * C64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    pub fn total_power(&self) -> f64 {
        self.taps.iter().map(|t| t.gain.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PowerDelayProfile {
    #[default]
    Uniform,
    /// Power proportional to `exp(-d / decay_taps)`.
    Exponential { decay_taps: f64 },
}

impl PowerDelayProfile {
    pub fn powers(&self, n_taps: usize) -> Vec<f64> {
        let raw: Vec<f64> = match *self {
            PowerDelayProfile::Uniform => vec![1.0; n_taps],
            PowerDelayProfile::Exponential { decay_taps } => {
                (0..n_taps).map(|d| (-(d as f64) / decay_taps).exp()).collect()
            }
        };
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / total).collect()
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// Rayleigh taps at delays `0..n_taps` with unit total average power.
pub fn draw_rayleigh<R: Rng + ?Sized>(
    n_taps: usize,
    profile: PowerDelayProfile,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if n_taps == 0 {
        return Err(Error::invalid("n_taps", "must be at least 1"));
    }
    if let PowerDelayProfile::Exponential { decay_taps } = profile {
        if !(decay_taps > 0.0 && decay_taps.is_finite()) {
            return Err(Error::invalid("decay_taps", "must be positive"));
        }
    }
    let gains: Vec<C64> = profile
        .powers(n_taps)
        .into_iter()
        .map(|p| complex_normal(rng, p))
        .collect();
    ChannelRealization::from_gains(&gains)
}

/// Path list of a doubly dispersive channel: magnitudes in dB, delays in
/// seconds (rounded to the symbol-rate grid), Dopplers in Hz, and a uniform
/// random phase per path.
pub fn ltv_channel<R: Rng + ?Sized>(
    gains_db: &[f64],
    delays_s: &[f64],
    dopplers_hz: &[f64],
    sampling_interval: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if gains_db.len() != delays_s.len() || gains_db.len() != dopplers_hz.len() {
        return Err(Error::invalid("paths", "gain, delay and Doppler lists differ in length"));
    }
    let taps = gains_db
        .iter()
        .zip(delays_s)
        .zip(dopplers_hz)
        .map(|((&g, &d), &f)| {
            let phase = rng.random_range(0.0..2.0 * PI);
            Tap {
                gain: C64::from_polar(10f64.powf(g / 20.0), phase),
                delay: (d / sampling_interval).round() as usize,
                doppler_hz: f,
            }
        })
        .collect();
    ChannelRealization::new(taps, ChannelKind::Ltv)
}

pub const REFERENCE_LTV_GAINS_DB: [f64; 4] = [0.0, -4.0, -5.0, -8.0];
pub const REFERENCE_LTV_DELAYS_S: [f64; 4] = [0.0, 10e-6, 20e-6, 40e-6];
pub const REFERENCE_LTV_DOPPLERS_HZ: [f64; 4] = [500.0, 1600.0, 2200.0, 3800.0];

/// The four-path doubly dispersive reference channel.
pub fn reference_ltv_channel<R: Rng + ?Sized>(
    sampling_interval: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    ltv_channel(
        &REFERENCE_LTV_GAINS_DB,
        &REFERENCE_LTV_DELAYS_S,
        &REFERENCE_LTV_DOPPLERS_HZ,
        sampling_interval,
        rng,
    )
}

/// Linear convolution truncated to the input length. Dopplers are ignored.
pub fn apply_static(frame: &[C64], ch: &ChannelRealization, oversample: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); frame.len()];
    for tap in ch.taps() {
        let shift = tap.delay * oversample;
        if shift >= frame.len() {
            continue;
        }
        for (o, x) in out[shift..].iter_mut().zip(frame) {
            *o += tap.gain * x;
        }
    }
    out
}

/// `y[i] = sum_p g_p exp(j 2 pi f_p i / fs) x[i - d_p L]`, with time zero at
/// the first sample of the frame.
pub fn apply_ltv(
    frame: &[C64],
    ch: &ChannelRealization,
    sample_rate: f64,
    oversample: usize,
) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); frame.len()];
    for tap in ch.taps() {
        let shift = tap.delay * oversample;
        if shift >= frame.len() {
            continue;
        }
        if tap.doppler_hz == 0.0 {
            for (o, x) in out[shift..].iter_mut().zip(frame) {
                *o += tap.gain * x;
            }
            continue;
        }
        let w = 2.0 * PI * tap.doppler_hz / sample_rate;
        for (i, (o, x)) in out[shift..].iter_mut().zip(frame).enumerate() {
            let t = (i + shift) as f64;
            *o += tap.gain * C64::from_polar(1.0, w * t) * x;
        }
    }
    out
}

pub fn mean_power(frame: &[C64]) -> f64 {
    if frame.is_empty() {
        return 0.0;
    }
    frame.iter().map(|v| v.norm_sqr()).sum::<f64>() / frame.len() as f64
}

/// Per-sample noise variance on the oversampled grid for a symbol-rate
/// `Es/N0`: the `N` symbols' energy is spread over `N L` samples, so the
/// per-sample power is scaled back up by `L`.
pub fn noise_variance(sample_power: f64, es_n0_db: f64, oversample: usize) -> f64 {
    if es_n0_db == f64::INFINITY {
        return 0.0;
    }
    sample_power * oversample as f64 / 10f64.powf(es_n0_db / 10.0)
}

pub fn add_noise<R: Rng + ?Sized>(frame: &mut [C64], variance: f64, rng: &mut R) {
    if variance == 0.0 {
        return;
    }
    for v in frame.iter_mut() {
        *v += complex_normal(rng, variance);
    }
}

/// AWGN scaled from the measured power of `frame`. `es_n0_db = +inf` leaves
/// the frame untouched.
pub fn apply_awgn<R: Rng + ?Sized>(
    frame: &[C64],
    es_n0_db: f64,
    oversample: usize,
    rng: &mut R,
) -> Result<Vec<C64>> {
    let p = mean_power(frame);
    if !p.is_finite() {
        return Err(Error::invalid("frame", "signal power is not finite"));
    }
    let mut out = frame.to_vec();
    add_noise(&mut out, noise_variance(p, es_n0_db, oversample), rng);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IciReport {
    pub alpha_offset: f64,
    pub signal_power: f64,
    pub ici_power: f64,
    /// `ici_power / signal_power`.
    pub ici_ratio: f64,
    pub papr_db: Option<f64>,
}

fn report_from_columns(alpha_offset: f64, columns: &[Vec<C64>]) -> IciReport {
    let n = columns.len();
    let mut signal = 0.0;
    let mut ici = 0.0;
    for (l, col) in columns.iter().enumerate() {
        for (k, v) in col.iter().enumerate() {
            if k == l {
                signal += v.norm_sqr();
            } else {
                ici += v.norm_sqr();
            }
        }
    }
    let signal_power = signal / n as f64;
    let ici_power = ici / n as f64;
    IciReport {
        alpha_offset,
        signal_power,
        ici_power,
        ici_ratio: if signal_power > 0.0 { ici_power / signal_power } else { f64::INFINITY },
        papr_db: None,
    }
}

fn unit(n: usize, l: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); n];
    e[l] = C64::new(1.0, 0.0);
    e
}

/// Columns `M[., l]` of the end-to-end map `s -> s_hat` (before
/// equalization), obtained by sending unit vectors.
pub fn end_to_end_columns(
    params: &FrfdmParams,
    cfg: &ChainConfig,
    ch: &ChannelRealization,
) -> Result<Vec<Vec<C64>>> {
    ch.validate_within_cp(cfg.n_cp)?;
    let n = params.n_subcarriers();
    (0..n)
        .into_par_iter()
        .map(|l| {
            let frame = transmit(params, cfg, &ComplexBlock::fractional(unit(n, l)))?;
            let rx = apply_ltv(&frame.samples, ch, params.sample_rate(), params.oversample());
            Ok(receive_unequalized(params, cfg, &rx)?.into_values())
        })
        .collect()
}

/// Diagonal and off-diagonal energy of the end-to-end matrix, per subcarrier.
pub fn ici_power(
    params: &FrfdmParams,
    cfg: &ChainConfig,
    ch: &ChannelRealization,
) -> Result<IciReport> {
    let columns = end_to_end_columns(params, cfg, ch)?;
    Ok(report_from_columns(params.angle_offset(), &columns))
}

/// The same measurement through the plain CP-OFDM transmitter and receiver.
pub fn ofdm_ici_power(
    n: usize,
    oversample: usize,
    block_duration: f64,
    n_cp: usize,
    ch: &ChannelRealization,
) -> Result<IciReport> {
    ch.validate_within_cp(n_cp)?;
    let sample_rate = (n * oversample) as f64 / block_duration;
    let columns = (0..n)
        .into_par_iter()
        .map(|l| {
            let frame = ofdm_transmit(&unit(n, l), oversample, n_cp)?;
            let rx = apply_ltv(&frame, ch, sample_rate, oversample);
            ofdm_receive(&rx, n, oversample, n_cp)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report_from_columns(0.0, &columns))
}
