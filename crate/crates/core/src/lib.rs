//! Dynamic-angle fractional Fourier division multiplexing (DA-FrFDM).
//!
//! Symbols are placed in a fractional Fourier domain whose angle is chosen
//! per block to minimise peak-to-average power. A quadratic phase applied to
//! the time samples keeps one-tap equalization exact for any angle. The crate
//! also carries the OFDM baselines (clipping, SLM, PTS), channel models, and
//! Monte Carlo runners used to compare them.

pub mod baselines;
pub mod chain;
pub mod channels;
pub mod eigen;
pub mod envelope;
pub mod error;
pub mod frft;
pub mod harness;
pub mod modulation;
pub mod search;
pub mod trig;

pub use error::{Error, Result};
pub use frft::{dfrft, idfrft, ComplexBlock, FrfdmParams, Grid, C64};
