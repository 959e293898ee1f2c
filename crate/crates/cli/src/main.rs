use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use frfdm::chain::{receive, transmit, ChainConfig};
use frfdm::channels::{apply_static, draw_rayleigh, PowerDelayProfile};
use frfdm::envelope::papr_db;
use frfdm::harness::{
    lane_stream, load_config, run_ber, run_ccdf, run_ici_tradeoff, run_mse, seed_stream,
    with_threads, write_ber, write_ccdf, write_ici, write_mse, ExperimentConfig, Scheme,
};
use frfdm::modulation::gaussian_samples;
use frfdm::search::{find_optimal_angle, AngleSearchConfig};
use frfdm::{dfrft, idfrft, ComplexBlock};
use log::info;

#[derive(Parser)]
#[command(name = "frfdm", version, about = "Fractional Fourier multicarrier PAPR experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// PAPR CCDF of one scheme.
    Ccdf(RunArgs),
    /// Bit error rate over the configured channel.
    Ber(RunArgs),
    /// Symbol MSE for Gaussian data.
    Mse(RunArgs),
    /// PAPR versus ICI sweep on the doubly dispersive reference channel.
    Ici(RunArgs),
    /// Quick numerical self-checks.
    Selftest(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; a `.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// ofdm, da-frfdm, da-frfdm-eigen, slm, pts or clipping.
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    blocks: Option<usize>,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(scheme) = self.scheme {
            cfg.scheme = scheme;
        }
        if let Some(blocks) = self.blocks {
            cfg.n_blocks = blocks;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output_path(cfg: &ExperimentConfig, runner: &str) -> PathBuf {
    cfg.output
        .clone()
        .unwrap_or_else(|| Path::new("results").join(format!("{runner}-{}.csv", cfg.scheme.label())))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ccdf(args) => {
            let cfg = args.resolve()?;
            let curve = with_threads(args.threads, || run_ccdf(&cfg))??;
            let path = output_path(&cfg, "ccdf");
            write_ccdf(&path, &cfg, &curve)?;
            info!(
                "{}: PAPR at CCDF 1e-3 = {:.2} dB, mean evaluations {:.2}; wrote {}",
                cfg.scheme.label(),
                curve.quantile_db(1e-3),
                curve.mean_evaluations,
                path.display()
            );
        }
        Command::Ber(args) => {
            let cfg = args.resolve()?;
            let curve = with_threads(args.threads, || run_ber(&cfg))??;
            let path = output_path(&cfg, "ber");
            write_ber(&path, &cfg, &curve)?;
            info!("wrote {}", path.display());
        }
        Command::Mse(args) => {
            let cfg = args.resolve()?;
            let curve = with_threads(args.threads, || run_mse(&cfg))??;
            let path = output_path(&cfg, "mse");
            write_mse(&path, &cfg, &curve)?;
            info!("wrote {}", path.display());
        }
        Command::Ici(args) => {
            let cfg = args.resolve()?;
            let table = with_threads(args.threads, || run_ici_tradeoff(&cfg))??;
            let path = output_path(&cfg, "ici");
            write_ici(&path, &cfg, &table)?;
            info!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        Command::Selftest(args) => {
            let cfg = args.resolve()?;
            return selftest(&cfg);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn check(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn selftest(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let n = cfg.n_subcarriers;
    let base = cfg.base_params()?;
    let mut rng = seed_stream(cfg.master_seed, 0);
    let s = ComplexBlock::fractional(gaussian_samples(n, &mut rng));
    let mut all = true;

    let p = base.with_offset(0.3)?;
    let back = dfrft(&p, &idfrft(&p, &s)?)?;
    let err = max_err(back.values(), s.values());
    all &= check("round trip", err < 1e-10, format!("max error {err:.2e}"));

    let search = AngleSearchConfig::from_divisors(&base, cfg.search.coarse_divisor, cfg.search.fine_ratio)?;
    let res = find_optimal_angle(&s, &base, &search)?;
    let p = base.with_offset(res.angle_offset)?;
    let direct = papr_db(&p, &s)?;
    all &= check(
        "angle search",
        (res.papr_db - direct).abs() < 1e-9,
        format!(
            "{:.2} dB at delta = {:.3e} ({} evaluations; {:.2} dB at delta = 0)",
            res.papr_db,
            res.angle_offset,
            res.evaluations,
            papr_db(&base, &s)?
        ),
    );

    let chain = ChainConfig::new(cfg.n_cp);
    let mut ch_rng = lane_stream(cfg.master_seed, 99, 0);
    let ch = draw_rayleigh(cfg.n_cp.clamp(1, 6), PowerDelayProfile::Uniform, &mut ch_rng)?;
    let frame = transmit(&p, &chain, &s)?;
    let rx = apply_static(&frame.samples, &ch, p.oversample());
    let est = receive(&p, &chain, &rx, &ch.frequency_response(n))?;
    let err = max_err(est.values(), s.values());
    all &= check("one-tap equalization", err < 1e-9, format!("max error {err:.2e}"));

    if !all {
        bail!("self-test failed");
    }
    Ok(ExitCode::SUCCESS)
}

fn max_err(a: &[frfdm::C64], b: &[frfdm::C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
