//! CSV tables with a JSON provenance sidecar next to each.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

use super::config::ExperimentConfig;
use super::runners::{BerCurve, CcdfCurve, IciTable, MseCurve};

/// Resolved configuration and run summary written as `<output>.json`.
#[derive(Debug, Serialize)]
pub struct Sidecar<'a, S: Serialize> {
    pub runner: &'static str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub summary: S,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn write_sidecar<S: Serialize>(
    path: &Path,
    runner: &'static str,
    cfg: &ExperimentConfig,
    summary: S,
) -> Result<()> {
    let sidecar = Sidecar {
        runner,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        summary,
    };
    let mut w = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut w, &sidecar)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CcdfSummary<'a> {
    scheme: &'a str,
    n_blocks: usize,
    master_seed: u64,
    mean_evaluations: f64,
    papr_at_1e_3_db: f64,
}

pub fn write_ccdf(path: &Path, cfg: &ExperimentConfig, curve: &CcdfCurve) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["threshold_db", "ccdf"])?;
    for (t, p) in curve.thresholds_db.iter().zip(&curve.ccdf) {
        w.serialize((t, p))?;
    }
    w.flush()?;
    write_sidecar(
        path,
        "ccdf",
        cfg,
        CcdfSummary {
            scheme: curve.scheme.label(),
            n_blocks: curve.n_blocks,
            master_seed: curve.master_seed,
            mean_evaluations: curve.mean_evaluations,
            papr_at_1e_3_db: curve.quantile_db(1e-3),
        },
    )
}

pub fn write_ber(path: &Path, cfg: &ExperimentConfig, curve: &BerCurve) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["snr_db", "ber", "bit_errors", "bits"])?;
    for ((s, b), e) in curve.snr_db.iter().zip(&curve.ber).zip(&curve.bit_errors) {
        w.serialize((s, b, e, curve.bits))?;
    }
    w.flush()?;
    write_sidecar(path, "ber", cfg, curve)
}

pub fn write_mse(path: &Path, cfg: &ExperimentConfig, curve: &MseCurve) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["snr_db", "mse"])?;
    for (s, m) in curve.snr_db.iter().zip(&curve.mse) {
        w.serialize((s, m))?;
    }
    w.flush()?;
    write_sidecar(path, "mse", cfg, curve)
}

pub fn write_ici(path: &Path, cfg: &ExperimentConfig, table: &IciTable) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "angle_offset",
        "papr_db",
        "signal_power",
        "ici_power",
        "ici_ratio",
    ])?;
    for r in &table.rows {
        w.serialize((r.angle_offset, r.papr_db, r.signal_power, r.ici_power, r.ici_ratio))?;
    }
    w.flush()?;
    write_sidecar(path, "ici", cfg, table)
}
