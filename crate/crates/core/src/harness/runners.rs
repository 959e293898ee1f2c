use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{clip, ofdm_modulate, pts, pts_recover, slm, slm_recover, Partition};
use crate::chain::{equalize_erasing, frame_from_body, receive_unequalized, Equalizer};
use crate::channels::{
    add_noise, apply_static, draw_rayleigh, ici_power, mean_power, noise_variance, ofdm_ici_power,
    reference_ltv_channel, ChannelRealization, IciReport,
};
use crate::eigen::HermiteBasis;
use crate::envelope::{papr_db, papr_db_of};
use crate::error::{Error, Result};
use crate::frft::{idfrft, ComplexBlock, FrfdmParams, C64};
use crate::modulation::{demodulate, draw_block, gaussian_samples, DataBlock, Demodulated, ModulationKind};
use crate::search::{brute_sweep_eigen_with, find_optimal_angle, periodic_span, AngleSearchConfig};

use super::config::{ChannelModel, ExperimentConfig, Scheme};
use super::rng::{lane_stream, seed_stream, LANE_LTV, LANE_NOISE, LANE_SLM};

/// Runs `f` on a dedicated pool of `threads` workers (the global pool when
/// `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
    }
}

/// What the receiver needs to undo a reducer.
#[derive(Debug, Clone, PartialEq)]
pub enum SideInfo {
    None,
    Slm(Vec<f64>),
    Pts(Vec<f64>, Partition),
    /// Not invertible.
    Clipped,
}

impl SideInfo {
    pub fn recover(&self, s_hat: Vec<C64>) -> Vec<C64> {
        match self {
            SideInfo::None | SideInfo::Clipped => s_hat,
            SideInfo::Slm(phases) => slm_recover(&s_hat, phases),
            SideInfo::Pts(phases, partition) => pts_recover(&s_hat, phases, *partition),
        }
    }
}

/// A data block after peak reduction, ready for the chain.
#[derive(Debug, Clone)]
pub struct Reduced {
    /// Transform parameters of the transmitted block; `delta = 0` except for
    /// the fractional schemes.
    pub params: FrfdmParams,
    /// `N * L` time samples before the quadratic phase.
    pub body: Vec<C64>,
    pub papr_db: f64,
    pub evaluations: usize,
    pub side: SideInfo,
}

struct Context {
    params: FrfdmParams,
    search: AngleSearchConfig,
    basis: Option<HermiteBasis>,
}

impl Context {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let params = cfg.base_params()?;
        let search = cfg.search_config(&params)?;
        let basis = (cfg.scheme == Scheme::DaFrfdmEigen).then(|| HermiteBasis::new(cfg.n_subcarriers));
        Ok(Self {
            params,
            search,
            basis,
        })
    }
}

/// Applies the configured scheme to one block. The eigenvector variant has
/// no oversampled chain and is rejected here.
pub fn reduce_block(
    cfg: &ExperimentConfig,
    params: &FrfdmParams,
    search: &AngleSearchConfig,
    s: &ComplexBlock,
    block_id: u64,
) -> Result<Reduced> {
    let l = params.oversample();
    let plain = |body: Vec<C64>, evaluations, side| -> Result<Reduced> {
        Ok(Reduced {
            params: *params,
            papr_db: papr_db_of(&body)?,
            body,
            evaluations,
            side,
        })
    };
    match cfg.scheme {
        Scheme::Ofdm => plain(ofdm_modulate(s.values(), l), 1, SideInfo::None),
        Scheme::Clipping => {
            let x = clip(&ofdm_modulate(s.values(), l), cfg.baselines.clip_ratio)?;
            plain(x, 1, SideInfo::Clipped)
        }
        Scheme::Slm => {
            let mut rng = lane_stream(cfg.master_seed, LANE_SLM, block_id);
            let out = slm(s, cfg.baselines.slm_candidates, l, &mut rng)?;
            Ok(Reduced {
                params: *params,
                body: out.time,
                papr_db: out.papr_db,
                evaluations: out.evaluations,
                side: SideInfo::Slm(out.phases),
            })
        }
        Scheme::Pts => {
            let out = pts(s, cfg.baselines.pts_subblocks, l, cfg.baselines.partition)?;
            Ok(Reduced {
                params: *params,
                body: out.time,
                papr_db: out.papr_db,
                evaluations: out.evaluations,
                side: SideInfo::Pts(out.phases, cfg.baselines.partition),
            })
        }
        Scheme::DaFrfdm => {
            let res = find_optimal_angle(s, params, search)?;
            let p = params.with_offset(res.angle_offset)?;
            Ok(Reduced {
                params: p,
                body: idfrft(&p, s)?.into_values(),
                papr_db: res.papr_db,
                evaluations: res.evaluations,
                side: SideInfo::None,
            })
        }
        Scheme::DaFrfdmEigen => Err(Error::config(
            "scheme",
            "da-frfdm-eigen has no oversampled chain; only the CCDF runner supports it",
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcdfCurve {
    pub scheme: Scheme,
    pub modulation: ModulationKind,
    pub n_blocks: usize,
    pub master_seed: u64,
    pub thresholds_db: Vec<f64>,
    /// `Pr(PAPR > threshold)`.
    pub ccdf: Vec<f64>,
    pub mean_evaluations: f64,
    /// Per-block PAPR in dB, ascending.
    #[serde(skip)]
    pub papr_db: Vec<f64>,
}

impl CcdfCurve {
    /// Smallest observed PAPR `g` with `Pr(PAPR > g) <= p`.
    pub fn quantile_db(&self, p: f64) -> f64 {
        let n = self.papr_db.len();
        let above = (p * n as f64).floor() as usize;
        let idx = n.saturating_sub(1 + above.min(n - 1));
        self.papr_db[idx]
    }

    /// Empirical CCDF at an arbitrary threshold.
    pub fn at(&self, threshold_db: f64) -> f64 {
        let above = self.papr_db.len() - self.papr_db.partition_point(|&v| v <= threshold_db);
        above as f64 / self.papr_db.len() as f64
    }
}

/// Per-block post-reduction PAPR over `n_blocks` independent blocks.
pub fn run_ccdf(cfg: &ExperimentConfig) -> Result<CcdfCurve> {
    if cfg.n_blocks < 100 {
        return Err(Error::config("n_blocks", "the CCDF runner needs at least 100 blocks"));
    }
    let ctx = Context::new(cfg)?;
    let n = cfg.n_subcarriers;
    let per_block: Vec<(f64, usize)> = (0..cfg.n_blocks as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed_stream(cfg.master_seed, b);
            let data = draw_block(cfg.modulation, n, &mut rng);
            if let Some(basis) = &ctx.basis {
                let r = brute_sweep_eigen_with(basis, &data.symbols, cfg.search.eigen_step)?;
                return Ok((r.papr_db, r.evaluations));
            }
            let r = reduce_block(cfg, &ctx.params, &ctx.search, &data.symbols, b)?;
            Ok((r.papr_db, r.evaluations))
        })
        .collect::<Result<_>>()?;

    let mut papr: Vec<f64> = per_block.iter().map(|p| p.0).collect();
    let evaluations: usize = per_block.iter().map(|p| p.1).sum();
    papr.sort_by(f64::total_cmp);
    let steps = (cfg.ccdf.max_db / cfg.ccdf.step_db + 1e-9).floor() as usize;
    let thresholds_db: Vec<f64> = (0..=steps).map(|i| i as f64 * cfg.ccdf.step_db).collect();
    let mut curve = CcdfCurve {
        scheme: cfg.scheme,
        modulation: cfg.modulation,
        n_blocks: cfg.n_blocks,
        master_seed: cfg.master_seed,
        ccdf: Vec::new(),
        thresholds_db,
        mean_evaluations: evaluations as f64 / cfg.n_blocks as f64,
        papr_db: papr,
    };
    curve.ccdf = curve.thresholds_db.iter().map(|&t| curve.at(t)).collect();
    Ok(curve)
}

fn draw_channel<R: Rng>(cfg: &ExperimentConfig, rng: &mut R) -> Result<ChannelRealization> {
    match cfg.channel.model {
        ChannelModel::Identity => Ok(ChannelRealization::identity()),
        ChannelModel::Rayleigh => draw_rayleigh(cfg.channel.n_taps, cfg.channel.profile, rng),
    }
}

/// Equalized, reducer-inverted symbol estimates of one block at every SNR
/// point, with the data that was sent.
fn link_block(
    cfg: &ExperimentConfig,
    ctx: &Context,
    block_id: u64,
) -> Result<(DataBlock, Vec<Vec<C64>>, usize)> {
    let n = cfg.n_subcarriers;
    let mut rng = seed_stream(cfg.master_seed, block_id);
    let data = draw_block(cfg.modulation, n, &mut rng);
    let ch = draw_channel(cfg, &mut rng)?;
    let chain = cfg.chain_config();
    ch.validate_within_cp(chain.n_cp)?;
    let reduced = reduce_block(cfg, &ctx.params, &ctx.search, &data.symbols, block_id)?;
    let p = reduced.params;
    let frame = frame_from_body(&p, &chain, reduced.body, Default::default())?;
    let power = mean_power(frame.body());
    let clean = apply_static(&frame.samples, &ch, p.oversample());
    let h_f = ch.frequency_response(n);
    let estimates = cfg
        .snr_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| {
            let mut rx = clean.clone();
            let var = noise_variance(power, snr, p.oversample());
            let mut noise_rng = lane_stream(cfg.master_seed, LANE_NOISE + i as u64, block_id);
            add_noise(&mut rx, var, &mut noise_rng);
            let raw = receive_unequalized(&p, &chain, &rx)?.into_values();
            let eq = match chain.equalizer {
                Equalizer::ZeroForcing => equalize_erasing(&raw, &h_f).0,
                Equalizer::Mmse { .. } => crate::chain::equalize(chain.equalizer, &raw, &h_f)?,
            };
            Ok(reduced.side.recover(eq))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((data, estimates, reduced.evaluations))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerCurve {
    pub scheme: Scheme,
    pub modulation: ModulationKind,
    pub n_blocks: usize,
    pub master_seed: u64,
    pub snr_db: Vec<f64>,
    pub bit_errors: Vec<u64>,
    pub bits: u64,
    pub ber: Vec<f64>,
    pub mean_evaluations: f64,
}

/// Bit error rate over block-fading channels, one channel and one reducer
/// decision per block shared by all SNR points.
pub fn run_ber(cfg: &ExperimentConfig) -> Result<BerCurve> {
    if cfg.modulation.bits_per_symbol().is_none() {
        return Err(Error::config("modulation", "BER needs a QAM modulation"));
    }
    let ctx = Context::new(cfg)?;
    let per_block: Vec<(Vec<u64>, usize, usize)> = (0..cfg.n_blocks as u64)
        .into_par_iter()
        .map(|b| {
            let (data, estimates, evals) = link_block(cfg, &ctx, b)?;
            let errors = estimates
                .iter()
                .map(|est| match demodulate(cfg.modulation, est) {
                    Demodulated::Bits(bits) => {
                        bits.iter().zip(&data.bits).filter(|(a, b)| a != b).count() as u64
                    }
                    Demodulated::Estimates(_) => unreachable!("QAM checked above"),
                })
                .collect();
            Ok((errors, data.bits.len(), evals))
        })
        .collect::<Result<_>>()?;

    let mut bit_errors = vec![0u64; cfg.snr_db.len()];
    let mut bits = 0u64;
    let mut evaluations = 0usize;
    for (errs, nb, ev) in &per_block {
        for (acc, e) in bit_errors.iter_mut().zip(errs) {
            *acc += e;
        }
        bits += *nb as u64;
        evaluations += ev;
    }
    Ok(BerCurve {
        scheme: cfg.scheme,
        modulation: cfg.modulation,
        n_blocks: cfg.n_blocks,
        master_seed: cfg.master_seed,
        snr_db: cfg.snr_db.clone(),
        ber: bit_errors.iter().map(|&e| e as f64 / bits as f64).collect(),
        bit_errors,
        bits,
        mean_evaluations: evaluations as f64 / cfg.n_blocks as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseCurve {
    pub scheme: Scheme,
    pub modulation: ModulationKind,
    pub n_blocks: usize,
    pub master_seed: u64,
    pub snr_db: Vec<f64>,
    /// `E|s_hat - s|^2` per symbol.
    pub mse: Vec<f64>,
    pub mean_evaluations: f64,
}

/// Mean squared symbol error of Gaussian blocks after equalization and
/// reducer inversion.
pub fn run_mse(cfg: &ExperimentConfig) -> Result<MseCurve> {
    if cfg.modulation != ModulationKind::ComplexGaussian {
        return Err(Error::config("modulation", "MSE needs complex-gaussian symbols"));
    }
    let ctx = Context::new(cfg)?;
    let per_block: Vec<(Vec<f64>, usize)> = (0..cfg.n_blocks as u64)
        .into_par_iter()
        .map(|b| {
            let (data, estimates, evals) = link_block(cfg, &ctx, b)?;
            let sent = data.symbols.values();
            let errs = estimates
                .iter()
                .map(|est| {
                    est.iter().zip(sent).map(|(a, s)| (a - s).norm_sqr()).sum::<f64>()
                })
                .collect();
            Ok((errs, evals))
        })
        .collect::<Result<_>>()?;

    let mut totals = vec![0.0; cfg.snr_db.len()];
    let mut evaluations = 0usize;
    for (errs, ev) in &per_block {
        for (acc, e) in totals.iter_mut().zip(errs) {
            *acc += e;
        }
        evaluations += ev;
    }
    let symbols = (cfg.n_blocks * cfg.n_subcarriers) as f64;
    Ok(MseCurve {
        scheme: cfg.scheme,
        modulation: cfg.modulation,
        n_blocks: cfg.n_blocks,
        master_seed: cfg.master_seed,
        snr_db: cfg.snr_db.clone(),
        mse: totals.iter().map(|t| t / symbols).collect(),
        mean_evaluations: evaluations as f64 / cfg.n_blocks as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IciRow {
    pub angle_offset: f64,
    pub papr_db: f64,
    pub signal_power: f64,
    pub ici_power: f64,
    pub ici_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IciTable {
    pub master_seed: u64,
    /// CP actually used, after any extension to the delay spread.
    pub n_cp: usize,
    pub rows: Vec<IciRow>,
    /// The same channel measured through the plain CP-OFDM code path.
    pub ofdm_reference: IciReport,
}

/// Sweeps the angle offset over one period of the PAPR pattern for a fixed
/// Gaussian block and records PAPR against ICI on the doubly dispersive
/// reference channel.
pub fn run_ici_tradeoff(cfg: &ExperimentConfig) -> Result<IciTable> {
    cfg.validate()?;
    let base = cfg.base_params()?;
    let n = cfg.n_subcarriers;
    let mut rng = seed_stream(cfg.master_seed, cfg.ici.block_id);
    let s = ComplexBlock::fractional(gaussian_samples(n, &mut rng));
    let mut ch_rng = lane_stream(cfg.master_seed, LANE_LTV, cfg.ici.block_id);
    let mut ch = reference_ltv_channel(base.sampling_interval(), &mut ch_rng)?;
    if cfg.ici.static_override {
        ch = ch.to_static();
    }
    let mut chain = cfg.chain_config();
    if cfg.ici.extend_cp {
        chain.n_cp = chain.n_cp.max(ch.max_delay());
    }
    ch.validate_within_cp(chain.n_cp)?;

    let span = periodic_span(cfg.block_duration)?;
    let step = span / (2.0 * cfg.ici.points as f64);
    let rows = (0..cfg.ici.points)
        .into_par_iter()
        .map(|i| {
            let p = base.with_offset(i as f64 * step)?;
            let r = ici_power(&p, &chain, &ch)?;
            Ok(IciRow {
                angle_offset: p.angle_offset(),
                papr_db: papr_db(&p, &s)?,
                signal_power: r.signal_power,
                ici_power: r.ici_power,
                ici_ratio: r.ici_ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ofdm_reference = ofdm_ici_power(n, cfg.oversample, cfg.block_duration, chain.n_cp, &ch)?;
    ofdm_reference.papr_db = Some(papr_db(&base, &s)?);
    Ok(IciTable {
        master_seed: cfg.master_seed,
        n_cp: chain.n_cp,
        rows,
        ofdm_reference,
    })
}
