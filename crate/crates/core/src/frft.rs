//! Sampling-based discrete fractional Fourier transform.
//!
//! The transform factors as chirp-multiply, DFT, chirp-multiply. Angles are
//! carried as the offset `delta = alpha - pi/2` because the useful search
//! range sits a few nano-radians away from `pi/2`, where evaluating
//! `cot(alpha)` or `sin(2 alpha)` from `alpha` itself would lose every
//! significant digit.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// In-place unitary DFT, `X[k] = n^{-1/2} sum x[n] e^{-j 2 pi n k / len}`.
pub fn fft_unitary(buf: &mut [C64]) {
    let len = buf.len();
    forward_plan(len).process(buf);
    let scale = 1.0 / (len as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// In-place unitary inverse DFT.
pub fn ifft_unitary(buf: &mut [C64]) {
    let len = buf.len();
    inverse_plan(len).process(buf);
    let scale = 1.0 / (len as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Transform configuration plus the constants derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrfdmParams {
    n_subcarriers: usize,
    oversample: usize,
    block_duration: f64,
    angle_offset: f64,
    sampling_interval: f64,
    du: f64,
    cot_alpha: f64,
    a_alpha: f64,
}

impl FrfdmParams {
    pub fn new(
        n_subcarriers: usize,
        oversample: usize,
        block_duration: f64,
        angle_offset: f64,
    ) -> Result<Self> {
        if n_subcarriers < 2 {
            return Err(Error::invalid("n_subcarriers", "must be at least 2"));
        }
        if oversample < 1 {
            return Err(Error::invalid("oversample", "must be at least 1"));
        }
        if !(block_duration.is_finite() && block_duration > 0.0) {
            return Err(Error::invalid("block_duration", "must be positive and finite"));
        }
        // alpha = 0 or pi collapses to single-carrier transmission
        if !(angle_offset.is_finite() && angle_offset.abs() < FRAC_PI_2) {
            return Err(Error::invalid(
                "angle_offset",
                format!("{angle_offset} is outside the open interval (-pi/2, pi/2)"),
            ));
        }
        let n = n_subcarriers as f64;
        let t = block_duration;
        let delta = angle_offset;
        Ok(Self {
            n_subcarriers,
            oversample,
            block_duration,
            angle_offset,
            sampling_interval: t / n,
            du: 2.0 * PI * delta.cos() / t,
            cot_alpha: -delta.tan(),
            a_alpha: PI * PI * (2.0 * delta).sin() / (t * t),
        })
    }

    /// Same transform dimensions at a different angle offset.
    pub fn with_offset(&self, angle_offset: f64) -> Result<Self> {
        Self::new(
            self.n_subcarriers,
            self.oversample,
            self.block_duration,
            angle_offset,
        )
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    /// Number of time samples per block, `N * L`.
    pub fn transform_len(&self) -> usize {
        self.n_subcarriers * self.oversample
    }

    pub fn block_duration(&self) -> f64 {
        self.block_duration
    }

    pub fn angle_offset(&self) -> f64 {
        self.angle_offset
    }

    pub fn alpha(&self) -> f64 {
        FRAC_PI_2 + self.angle_offset
    }

    pub fn sin_alpha(&self) -> f64 {
        self.angle_offset.cos()
    }

    pub fn cos_alpha(&self) -> f64 {
        -self.angle_offset.sin()
    }

    /// `cos(2 alpha)`, evaluated from the offset.
    pub fn cos_two_alpha(&self) -> f64 {
        -(2.0 * self.angle_offset).cos()
    }

    /// Symbol-rate sampling interval `T_s = T / N`.
    pub fn sampling_interval(&self) -> f64 {
        self.sampling_interval
    }

    /// Interval of the oversampled time grid, `T_s / L`.
    pub fn oversampled_interval(&self) -> f64 {
        self.sampling_interval / self.oversample as f64
    }

    /// Fractional-domain sampling interval; `du * T_s = 2 pi sin(alpha) / N`.
    pub fn du(&self) -> f64 {
        self.du
    }

    pub fn cot_alpha(&self) -> f64 {
        self.cot_alpha
    }

    /// `A_alpha = -pi^2 sin(2 alpha) / T^2`.
    pub fn a_alpha(&self) -> f64 {
        self.a_alpha
    }

    /// Oversampled sample rate in Hz.
    pub fn sample_rate(&self) -> f64 {
        self.transform_len() as f64 / self.block_duration
    }

    /// Chirp rate on the fractional-domain index: the symbol chirp is
    /// `exp(-j * rate * k^2)`.
    pub fn symbol_chirp_rate(&self) -> f64 {
        0.5 * self.cot_alpha * self.du * self.du
    }

    /// Chirp rate on the oversampled time index: the time chirp is
    /// `exp(-j * rate * i^2)`.
    pub fn time_chirp_rate(&self) -> f64 {
        let ts = self.oversampled_interval();
        0.5 * self.cot_alpha * ts * ts
    }

    /// Unit-modulus part of `k_alpha`, the principal root of
    /// `sin(alpha) + j cos(alpha) = exp(-j delta)`.
    pub fn kernel_phase(&self) -> C64 {
        C64::from_polar(1.0, -0.5 * self.angle_offset)
    }

    /// True at `delta = 0`, where every chirp is identically one.
    pub fn is_fourier(&self) -> bool {
        self.angle_offset == 0.0
    }
}

/// Which domain a block of samples lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// `N` data-bearing symbols.
    Fractional,
    /// `N * L` time samples.
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBlock {
    grid: Grid,
    values: Vec<C64>,
}

impl ComplexBlock {
    pub fn fractional(values: Vec<C64>) -> Self {
        Self {
            grid: Grid::Fractional,
            values,
        }
    }

    pub fn time(values: Vec<C64>) -> Self {
        Self {
            grid: Grid::Time,
            values,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Checks the length against the grid this block claims to be on.
    pub fn check(&self, params: &FrfdmParams, grid: Grid) -> Result<()> {
        if self.grid != grid {
            return Err(Error::invalid(
                "block",
                format!("expected a {grid:?}-domain block, got {:?}", self.grid),
            ));
        }
        let expected = match grid {
            Grid::Fractional => params.n_subcarriers(),
            Grid::Time => params.transform_len(),
        };
        if self.values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: self.values.len(),
            });
        }
        Ok(())
    }
}

fn chirp(rate: f64, index: usize) -> C64 {
    let i = index as f64;
    C64::from_polar(1.0, -rate * i * i)
}

/// Inverse transform: `N` fractional-domain symbols to `N * L` time samples.
///
/// The symbol vector is zero-padded at indices `N..N*L` and the `N*L`-point
/// kernel is applied with the oversampled time interval `T_s / L` and an
/// unchanged fractional interval `du`.
pub fn idfrft(params: &FrfdmParams, s: &ComplexBlock) -> Result<ComplexBlock> {
    s.check(params, Grid::Fractional)?;
    let len = params.transform_len();
    let mut buf = vec![C64::new(0.0, 0.0); len];
    buf[..s.len()].copy_from_slice(s.values());
    if !params.is_fourier() {
        let rate = params.symbol_chirp_rate();
        for (k, v) in buf.iter_mut().take(s.len()).enumerate() {
            *v *= chirp(rate, k);
        }
    }
    ifft_unitary(&mut buf);
    if !params.is_fourier() {
        let rate = params.time_chirp_rate();
        let phase = params.kernel_phase();
        for (i, v) in buf.iter_mut().enumerate() {
            *v *= phase * chirp(rate, i);
        }
    }
    Ok(ComplexBlock::time(buf))
}

/// Forward transform, the adjoint of [`idfrft`]; the oversampling tail of
/// the fractional-domain output is dropped.
pub fn dfrft(params: &FrfdmParams, x: &ComplexBlock) -> Result<ComplexBlock> {
    x.check(params, Grid::Time)?;
    let mut buf = x.values().to_vec();
    if !params.is_fourier() {
        let rate = params.time_chirp_rate();
        let phase = params.kernel_phase().conj();
        for (i, v) in buf.iter_mut().enumerate() {
            *v *= phase * chirp(rate, i).conj();
        }
    }
    fft_unitary(&mut buf);
    buf.truncate(params.n_subcarriers());
    if !params.is_fourier() {
        let rate = params.symbol_chirp_rate();
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= chirp(rate, k).conj();
        }
    }
    Ok(ComplexBlock::fractional(buf))
}
