//! OFDM peak reducers used as references: amplitude clipping, selected
//! mapping (SLM) and partial transmit sequences (PTS).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envelope::papr_db_of;
use crate::error::{Error, Result};
use crate::frft::{ifft_unitary, ComplexBlock, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partition {
    /// Subblock `v` holds indices `v N/V .. (v+1) N/V`.
    #[default]
    Adjacent,
    /// Subblock `v` holds indices `k` with `k mod V = v`.
    Interleaved,
}

impl Partition {
    pub fn subblock_of(self, k: usize, n: usize, v: usize) -> usize {
        match self {
            Partition::Adjacent => k / (n / v),
            Partition::Interleaved => k % v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub slm_candidates: usize,
    pub pts_subblocks: usize,
    pub clip_ratio: f64,
    pub partition: Partition,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            slm_candidates: 128,
            pts_subblocks: 8,
            clip_ratio: 2.0,
            partition: Partition::Adjacent,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.slm_candidates == 0 {
            return Err(Error::invalid("slm_candidates", "must be at least 1"));
        }
        if self.pts_subblocks == 0 || !n.is_multiple_of(self.pts_subblocks) {
            return Err(Error::invalid(
                "pts_subblocks",
                format!("{} does not divide N = {n}", self.pts_subblocks),
            ));
        }
        if self.pts_subblocks > 31 {
            return Err(Error::invalid("pts_subblocks", "at most 31 subblocks"));
        }
        if !(self.clip_ratio > 0.0 && self.clip_ratio.is_finite()) {
            return Err(Error::invalid("clip_ratio", "must be positive"));
        }
        Ok(())
    }
}

/// Zero-padded unitary IFFT: `N` symbols to `N L` time samples.
pub fn ofdm_modulate(s: &[C64], oversample: usize) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); s.len() * oversample];
    buf[..s.len()].copy_from_slice(s);
    ifft_unitary(&mut buf);
    buf
}

/// Limits every sample to `CR * rms(x)`, keeping its phase. A zero block is
/// returned as is.
pub fn clip(x: &[C64], clip_ratio: f64) -> Result<Vec<C64>> {
    if x.is_empty() {
        return Err(Error::invalid("x", "empty block"));
    }
    let rms = (x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64).sqrt();
    let limit = clip_ratio * rms;
    Ok(x.iter()
        .map(|&v| {
            let m = v.norm();
            if m < limit || m == 0.0 {
                v
            } else {
                v * (limit / m)
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlmOutput {
    pub time: Vec<C64>,
    pub index: usize,
    /// The selected `+-1` sequence.
    pub phases: Vec<f64>,
    pub papr_db: f64,
    pub evaluations: usize,
}

/// Candidate `u` multiplies the symbols by a `+-1` sequence; candidate 0 is
/// all ones, the others are drawn from `rng`. The lowest-PAPR candidate wins,
/// the lower index on ties.
pub fn slm<R: Rng + ?Sized>(
    s: &ComplexBlock,
    candidates: usize,
    oversample: usize,
    rng: &mut R,
) -> Result<SlmOutput> {
    if candidates == 0 {
        return Err(Error::invalid("slm_candidates", "must be at least 1"));
    }
    let n = s.len();
    let mut best: Option<SlmOutput> = None;
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for u in 0..candidates {
        let phases: Vec<f64> = if u == 0 {
            vec![1.0; n]
        } else {
            (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
        };
        for ((b, v), p) in buf.iter_mut().zip(s.values()).zip(&phases) {
            *b = v * *p;
        }
        let time = ofdm_modulate(&buf, oversample);
        let papr = papr_db_of(&time)?;
        if best.as_ref().is_none_or(|b| papr < b.papr_db) {
            best = Some(SlmOutput {
                time,
                index: u,
                phases,
                papr_db: papr,
                evaluations: 0,
            });
        }
    }
    let mut out = best.expect("at least one candidate");
    out.evaluations = candidates;
    Ok(out)
}

/// Undoes the SLM phase sequence on equalized symbols.
pub fn slm_recover(s_hat: &[C64], phases: &[f64]) -> Vec<C64> {
    s_hat.iter().zip(phases).map(|(v, p)| v * *p).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtsOutput {
    pub time: Vec<C64>,
    /// One `+-1` factor per subblock; the first is always `+1`.
    pub phases: Vec<f64>,
    pub papr_db: f64,
    pub evaluations: usize,
}

/// Splits the symbols into `V` subblocks, transforms each once, and tries
/// every sign pattern with the first subblock fixed to `+1`.
pub fn pts(
    s: &ComplexBlock,
    subblocks: usize,
    oversample: usize,
    partition: Partition,
) -> Result<PtsOutput> {
    let n = s.len();
    if subblocks == 0 || !n.is_multiple_of(subblocks) {
        return Err(Error::invalid(
            "pts_subblocks",
            format!("{subblocks} does not divide N = {n}"),
        ));
    }
    if subblocks > 31 {
        return Err(Error::invalid("pts_subblocks", "at most 31 subblocks"));
    }
    let partials: Vec<Vec<C64>> = (0..subblocks)
        .map(|v| {
            let part: Vec<C64> = s
                .values()
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    if partition.subblock_of(k, n, subblocks) == v {
                        x
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            ofdm_modulate(&part, oversample)
        })
        .collect();
    let len = n * oversample;
    let combos = 1usize << (subblocks - 1);
    let mut sum = vec![C64::new(0.0, 0.0); len];
    let mut best: Option<(f64, usize, Vec<C64>)> = None;
    for m in 0..combos {
        sum.copy_from_slice(&partials[0]);
        for (v, part) in partials.iter().enumerate().skip(1) {
            let sign = if (m >> (v - 1)) & 1 == 1 { -1.0 } else { 1.0 };
            for (acc, p) in sum.iter_mut().zip(part) {
                *acc += p * sign;
            }
        }
        let papr = papr_db_of(&sum)?;
        if best.as_ref().is_none_or(|b| papr < b.0) {
            best = Some((papr, m, sum.clone()));
        }
    }
    let (papr_db, m, time) = best.expect("at least one combination");
    Ok(PtsOutput {
        time,
        phases: pts_phases(m, subblocks),
        papr_db,
        evaluations: combos,
    })
}

fn pts_phases(m: usize, subblocks: usize) -> Vec<f64> {
    (0..subblocks)
        .map(|v| {
            if v > 0 && (m >> (v - 1)) & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .collect()
}

/// Undoes the PTS subblock signs on equalized symbols.
pub fn pts_recover(s_hat: &[C64], phases: &[f64], partition: Partition) -> Vec<C64> {
    let n = s_hat.len();
    let v = phases.len();
    s_hat
        .iter()
        .enumerate()
        .map(|(k, x)| x * phases[partition.subblock_of(k, n, v)])
        .collect()
}
