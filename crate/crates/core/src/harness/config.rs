use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineConfig;
use crate::chain::{ChainConfig, Equalizer, ThetaConvention};
use crate::channels::PowerDelayProfile;
use crate::error::{Error, Result};
use crate::frft::FrfdmParams;
use crate::modulation::ModulationKind;
use crate::search::{periodic_span, AngleSearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Ofdm,
    DaFrfdm,
    DaFrfdmEigen,
    Slm,
    Pts,
    Clipping,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Ofdm,
        Scheme::DaFrfdm,
        Scheme::DaFrfdmEigen,
        Scheme::Slm,
        Scheme::Pts,
        Scheme::Clipping,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Ofdm => "ofdm",
            Scheme::DaFrfdm => "da-frfdm",
            Scheme::DaFrfdmEigen => "da-frfdm-eigen",
            Scheme::Slm => "slm",
            Scheme::Pts => "pts",
            Scheme::Clipping => "clipping",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::config("scheme", format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSettings {
    /// Coarse step is `asin(T^2/pi) / coarse_divisor`.
    pub coarse_divisor: f64,
    /// Fine step is the coarse step divided by this.
    pub fine_ratio: usize,
    /// Grid for scoring candidates; `N * L` when absent.
    pub papr_grid_points: Option<usize>,
    /// Angle step of the brute-force sweep used with the eigenvector
    /// transform.
    pub eigen_step: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            coarse_divisor: 80.0,
            fine_ratio: 39,
            papr_grid_points: None,
            eigen_step: PI * 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSettings {
    pub theta: ThetaConvention,
    pub equalizer: Equalizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelModel {
    Identity,
    Rayleigh,
}

/// Channel used by the BER and MSE runners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSpec {
    pub model: ChannelModel,
    pub n_taps: usize,
    pub profile: PowerDelayProfile,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            model: ChannelModel::Rayleigh,
            n_taps: 6,
            profile: PowerDelayProfile::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcdfSettings {
    pub step_db: f64,
    pub max_db: f64,
}

impl Default for CcdfSettings {
    fn default() -> Self {
        Self {
            step_db: 0.1,
            max_db: 14.0,
        }
    }
}

/// Settings of the PAPR / ICI trade-off sweep over the doubly dispersive
/// reference channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IciSettings {
    /// Offsets `i * asin(T^2/pi) / (2 points)`, `i = 0 .. points`.
    pub points: usize,
    /// Which data block (by id) is swept.
    pub block_id: u64,
    /// Drop the Dopplers and sweep the static version of the channel.
    pub static_override: bool,
    /// Grow the CP to the channel's delay spread when it is shorter.
    pub extend_cp: bool,
}

impl Default for IciSettings {
    fn default() -> Self {
        Self {
            points: 81,
            block_id: 0,
            static_override: false,
            extend_cp: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub modulation: ModulationKind,
    pub n_subcarriers: usize,
    pub oversample: usize,
    /// Block duration in seconds.
    pub block_duration: f64,
    /// Cyclic prefix in symbol-rate samples.
    pub n_cp: usize,
    pub n_blocks: usize,
    /// `Es/N0` grid in dB for the BER and MSE runners; `inf` is allowed.
    pub snr_db: Vec<f64>,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub search: SearchSettings,
    pub baselines: BaselineConfig,
    pub chain: ChainSettings,
    pub channel: ChannelSpec,
    pub ccdf: CcdfSettings,
    pub ici: IciSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::DaFrfdm,
            modulation: ModulationKind::Qam64,
            n_subcarriers: 64,
            oversample: 10,
            block_duration: 128e-6,
            n_cp: 10,
            n_blocks: 10_000,
            snr_db: (0..=6).map(|i| 5.0 * i as f64).collect(),
            master_seed: 2024,
            output: None,
            search: SearchSettings::default(),
            baselines: BaselineConfig::default(),
            chain: ChainSettings::default(),
            channel: ChannelSpec::default(),
            ccdf: CcdfSettings::default(),
            ici: IciSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| Error::config("<document>", e.to_string()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<document>", e.to_string()))
    }

    /// Transform parameters at `delta = 0`.
    pub fn base_params(&self) -> Result<FrfdmParams> {
        FrfdmParams::new(self.n_subcarriers, self.oversample, self.block_duration, 0.0)
    }

    pub fn search_config(&self, params: &FrfdmParams) -> Result<AngleSearchConfig> {
        let mut cfg =
            AngleSearchConfig::from_divisors(params, self.search.coarse_divisor, self.search.fine_ratio)?;
        if let Some(points) = self.search.papr_grid_points {
            cfg.papr_grid_points = points;
            cfg.validate(params)?;
        }
        Ok(cfg)
    }

    pub fn chain_config(&self) -> ChainConfig {
        ChainConfig {
            n_cp: self.n_cp,
            theta: self.chain.theta,
            equalizer: self.chain.equalizer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let key = |k: &str, e: Error| Error::config(k, e.to_string());
        if self.n_subcarriers < 2 {
            return Err(Error::config("n_subcarriers", "must be at least 2"));
        }
        if self.oversample < 1 {
            return Err(Error::config("oversample", "must be at least 1"));
        }
        if !(self.block_duration > 0.0 && self.block_duration.is_finite()) {
            return Err(Error::config("block_duration", "must be positive"));
        }
        periodic_span(self.block_duration).map_err(|e| key("block_duration", e))?;
        if self.n_cp > self.n_subcarriers {
            return Err(Error::config("n_cp", "longer than the block"));
        }
        if self.n_blocks == 0 {
            return Err(Error::config("n_blocks", "must be at least 1"));
        }
        if let Some(i) = self.snr_db.iter().position(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::config(format!("snr_db[{i}]"), "must be a number or +inf"));
        }
        let params = self.base_params().map_err(|e| key("n_subcarriers", e))?;
        if self.search.coarse_divisor.is_nan() || self.search.coarse_divisor < 2.0 {
            return Err(Error::config("search.coarse_divisor", "must be at least 2"));
        }
        if self.search.fine_ratio == 0 {
            return Err(Error::config("search.fine_ratio", "must be positive"));
        }
        self.search_config(&params)
            .map_err(|e| key("search.papr_grid_points", e))?;
        if !(self.search.eigen_step > 0.0 && self.search.eigen_step < PI) {
            return Err(Error::config("search.eigen_step", "must lie in (0, pi)"));
        }
        self.baselines
            .validate(self.n_subcarriers)
            .map_err(|e| match e {
                Error::InvalidParameter { name, reason } => {
                    Error::config(format!("baselines.{name}"), reason)
                }
                other => other,
            })?;
        if let Equalizer::Mmse { noise_variance } = self.chain.equalizer {
            if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
                return Err(Error::config("chain.equalizer.noise_variance", "must be non-negative"));
            }
        }
        if self.channel.n_taps == 0 || self.channel.n_taps > self.n_cp {
            return Err(Error::config(
                "channel.n_taps",
                format!("must lie in 1..={}", self.n_cp),
            ));
        }
        if let PowerDelayProfile::Exponential { decay_taps } = self.channel.profile {
            if !(decay_taps > 0.0 && decay_taps.is_finite()) {
                return Err(Error::config("channel.profile.decay_taps", "must be positive"));
            }
        }
        if !(self.ccdf.step_db > 0.0 && self.ccdf.max_db > 0.0 && self.ccdf.max_db.is_finite()) {
            return Err(Error::config("ccdf", "step_db and max_db must be positive"));
        }
        if self.ici.points == 0 {
            return Err(Error::config("ici.points", "must be positive"));
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_toml_str(&text)
}
