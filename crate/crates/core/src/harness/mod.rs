//! Monte Carlo experiment runners and their configuration.

mod config;
mod output;
mod rng;
mod runners;

pub use config::{
    load_config, CcdfSettings, ChainSettings, ChannelModel, ChannelSpec, ExperimentConfig,
    IciSettings, Scheme, SearchSettings,
};
pub use output::{write_ber, write_ccdf, write_ici, write_mse, Sidecar};
pub use rng::{lane_stream, seed_stream, LANE_DATA, LANE_LTV, LANE_NOISE, LANE_SLM};
pub use runners::{
    reduce_block, run_ber, run_ccdf, run_ici_tradeoff, run_mse, with_threads, BerCurve, CcdfCurve,
    IciRow, IciTable, MseCurve, Reduced, SideInfo,
};
