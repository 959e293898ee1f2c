//! Per-block search for the PAPR-minimising fractional angle.
//!
//! PAPR is periodic in `A_alpha` with period `pi`, so every achievable value
//! is reached for offsets `delta` in `[0, asin(T^2 / pi) / 2)`. The search
//! walks that range on a coarse grid, keeps the coarse intervals where the
//! surrogate derivative `I'` crosses from non-positive to non-negative,
//! refines them on a fine grid, keeps the fine points that again bracket a
//! sign change, and finally evaluates PAPR only on those survivors.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::eigen::HermiteBasis;
use crate::envelope::{
    a_alpha_at, envelope_coeffs, harmonic_coeffs, min_g_grid, papr_db_from_envelope, papr_db_of,
    surrogate_i_prime_at, EnvelopeCoeffs, MIN_BLOCK_ENERGY,
};
use crate::error::{Error, Result};
use crate::frft::{ComplexBlock, FrfdmParams, Grid, C64};

/// `asin(T^2 / pi)`; the search covers half of it.
pub fn periodic_span(block_duration: f64) -> Result<f64> {
    let x = block_duration * block_duration / PI;
    if !(x.is_finite() && x <= 1.0) {
        return Err(Error::invalid(
            "block_duration",
            format!("T^2/pi = {x} exceeds 1; the periodic angle range is undefined"),
        ));
    }
    Ok(x.asin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSearchConfig {
    /// Coarse step in radians.
    pub coarse_step: f64,
    /// Fine step in radians; must divide `coarse_step`.
    pub fine_step: f64,
    /// Grid size for the `max g` evaluations that score each candidate.
    pub papr_grid_points: usize,
    /// Whether the fine grid of a bracket includes its right end
    /// (`j = 0 ..= coarse/fine`).
    pub fine_grid_inclusive: bool,
}

impl AngleSearchConfig {
    /// Steps `asin(T^2/pi) / coarse_divisor` and `coarse / fine_ratio`, with
    /// the candidate PAPR scored on the `N * L` oversampled time grid.
    pub fn from_divisors(params: &FrfdmParams, coarse_divisor: f64, fine_ratio: usize) -> Result<Self> {
        if coarse_divisor.is_nan() || coarse_divisor < 2.0 {
            return Err(Error::invalid("coarse_divisor", "must be at least 2"));
        }
        if fine_ratio == 0 {
            return Err(Error::invalid("fine_ratio", "must be positive"));
        }
        let coarse = periodic_span(params.block_duration())? / coarse_divisor;
        let cfg = Self {
            coarse_step: coarse,
            fine_step: coarse / fine_ratio as f64,
            papr_grid_points: params.transform_len(),
            fine_grid_inclusive: true,
        };
        cfg.validate(params)?;
        Ok(cfg)
    }

    /// The reference configuration: divisor 80, fine ratio 39.
    pub fn reference(params: &FrfdmParams) -> Result<Self> {
        Self::from_divisors(params, 80.0, 39)
    }

    /// Checks the step invariants and returns `coarse_step / fine_step`.
    pub fn validate(&self, params: &FrfdmParams) -> Result<usize> {
        let span = periodic_span(params.block_duration())?;
        if !(self.coarse_step > 0.0 && self.coarse_step <= 0.5 * span * (1.0 + 1e-12)) {
            return Err(Error::invalid(
                "coarse_step",
                "must lie in (0, asin(T^2/pi)/2]",
            ));
        }
        if !(self.fine_step > 0.0 && self.fine_step <= self.coarse_step) {
            return Err(Error::invalid("fine_step", "must lie in (0, coarse_step]"));
        }
        let ratio = self.coarse_step / self.fine_step;
        let rounded = ratio.round();
        if (ratio - rounded).abs() > 1e-9 * ratio {
            return Err(Error::invalid(
                "fine_step",
                format!("coarse/fine = {ratio} is not an integer"),
            ));
        }
        let need = min_g_grid(params.n_subcarriers());
        if self.papr_grid_points < need {
            return Err(Error::invalid(
                "papr_grid_points",
                format!("{} is below the minimum of {need}", self.papr_grid_points),
            ));
        }
        Ok(rounded as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleSearchResult {
    /// `delta* = alpha* - pi/2`.
    pub angle_offset: f64,
    pub papr_db: f64,
    /// PAPR evaluations performed (size of the final candidate set, or 1 on
    /// fallback).
    pub evaluations: usize,
    /// Distinct surrogate-derivative evaluations.
    pub derivative_evaluations: usize,
    pub fallback_used: bool,
    /// Offsets of the retained candidates, ascending.
    pub candidates: Vec<f64>,
}

impl AngleSearchResult {
    pub fn alpha(&self) -> f64 {
        FRAC_PI_2 + self.angle_offset
    }
}

/// Coarse grid offsets `i * coarse_step`, `i = 0 .. asin(T^2/pi)/(2 step) - 1`.
pub fn initial_set(block_duration: f64, coarse_step: f64) -> Result<Vec<f64>> {
    if !(coarse_step > 0.0 && coarse_step.is_finite()) {
        return Err(Error::invalid("coarse_step", "must be positive"));
    }
    let span = periodic_span(block_duration)?;
    let count = (span / (2.0 * coarse_step) + 1e-9).floor() as usize;
    Ok((0..count).map(|i| i as f64 * coarse_step).collect())
}

/// Fine-grid bookkeeping: point `q` sits at `(q / R) coarse + (q % R) fine`,
/// so coarse point `i` is `q = i R` and the same angle always has one key.
struct FineGrid {
    coarse: f64,
    fine: f64,
    ratio: u64,
}

impl FineGrid {
    fn offset(&self, q: u64) -> f64 {
        (q / self.ratio) as f64 * self.coarse + (q % self.ratio) as f64 * self.fine
    }
}

struct DerivativeCache<'a> {
    env: &'a EnvelopeCoeffs,
    duration: f64,
    grid: FineGrid,
    values: HashMap<u64, f64>,
}

impl DerivativeCache<'_> {
    fn at(&mut self, q: u64) -> f64 {
        if let Some(&v) = self.values.get(&q) {
            return v;
        }
        let v = surrogate_i_prime_at(self.env, self.duration, self.grid.offset(q));
        self.values.insert(q, v);
        v
    }
}

/// Finds the PAPR-minimising angle for `s`. Only the dimensions and block
/// duration of `params` are used; its angle is ignored.
pub fn find_optimal_angle(
    s: &ComplexBlock,
    params: &FrfdmParams,
    cfg: &AngleSearchConfig,
) -> Result<AngleSearchResult> {
    s.check(params, Grid::Fractional)?;
    let ratio = cfg.validate(params)? as u64;
    let env = envelope_coeffs(s)?;
    if env.mean_power_sum() < MIN_BLOCK_ENERGY {
        return Err(Error::ZeroPower);
    }
    let t = params.block_duration();
    let coarse_count = initial_set(t, cfg.coarse_step)?.len() as u64;
    let mut deriv = DerivativeCache {
        env: &env,
        duration: t,
        grid: FineGrid {
            coarse: cfg.coarse_step,
            fine: cfg.fine_step,
            ratio,
        },
        values: HashMap::new(),
    };

    let fine_last = if cfg.fine_grid_inclusive { ratio } else { ratio - 1 };
    let mut omega = BTreeSet::new();
    for i in 0..coarse_count {
        let left = deriv.at(i * ratio);
        let right = deriv.at((i + 1) * ratio);
        if left <= 0.0 && right >= 0.0 {
            omega.extend((0..=fine_last).map(|j| i * ratio + j));
        }
    }

    let retained: Vec<u64> = omega
        .into_iter()
        .filter(|&q| deriv.at(q) <= 0.0 && deriv.at(q + 1) >= 0.0)
        .collect();
    let derivative_evaluations = deriv.values.len();

    if retained.is_empty() {
        let h = harmonic_coeffs(&env, 0.0);
        return Ok(AngleSearchResult {
            angle_offset: 0.0,
            papr_db: papr_db_from_envelope(&env, &h, cfg.papr_grid_points)?,
            evaluations: 1,
            derivative_evaluations,
            fallback_used: true,
            candidates: Vec::new(),
        });
    }

    let candidates: Vec<f64> = retained.iter().map(|&q| deriv.grid.offset(q)).collect();
    let mut best = (f64::INFINITY, 0.0);
    for &delta in &candidates {
        let h = harmonic_coeffs(&env, a_alpha_at(t, delta));
        let papr = papr_db_from_envelope(&env, &h, cfg.papr_grid_points)?;
        if papr < best.0 {
            best = (papr, delta);
        }
    }
    Ok(AngleSearchResult {
        angle_offset: best.1,
        papr_db: best.0,
        evaluations: candidates.len(),
        derivative_evaluations,
        fallback_used: false,
        candidates,
    })
}

/// Angles `i * step` covering `[0, 2 pi)`.
pub fn eigen_sweep_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", "must be positive"));
    }
    let count = ((2.0 * PI) / step - 1e-9).ceil().max(1.0) as usize;
    Ok((0..count).map(|i| i as f64 * step).collect())
}

/// Exhaustive sweep of the eigendecomposition transform without
/// oversampling: every angle on the grid is scored and the lowest PAPR wins
/// (ties go to the smaller angle).
pub fn brute_sweep_eigen_with(
    basis: &HermiteBasis,
    s: &ComplexBlock,
    step: f64,
) -> Result<AngleSearchResult> {
    if s.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            actual: s.len(),
        });
    }
    if s.energy() < MIN_BLOCK_ENERGY {
        return Err(Error::ZeroPower);
    }
    let grid = eigen_sweep_grid(step)?;
    let coeffs = basis.project(s.values());
    let mut x = vec![C64::new(0.0, 0.0); basis.len()];
    let mut best = (f64::INFINITY, 0.0);
    for &alpha in &grid {
        // inverse transform of angle alpha
        basis.apply_projected(&coeffs, -alpha, &mut x);
        let papr = papr_db_of(&x)?;
        if papr < best.0 {
            best = (papr, alpha);
        }
    }
    Ok(AngleSearchResult {
        angle_offset: best.1 - FRAC_PI_2,
        papr_db: best.0,
        evaluations: grid.len(),
        derivative_evaluations: 0,
        fallback_used: false,
        candidates: Vec::new(),
    })
}

pub fn brute_sweep_eigen(s: &ComplexBlock, step: f64) -> Result<AngleSearchResult> {
    brute_sweep_eigen_with(&HermiteBasis::new(s.len()), s, step)
}
