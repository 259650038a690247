//! CSV tables, the run manifest and raw field snapshots.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use besov_ch::{Complex64, SpectralField, TorusGrid};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiment::ExperimentRecord;

pub const CSV_HEADER: [&str; 8] = [
    "k",
    "n",
    "eps",
    "t",
    "block_norm",
    "besov_sigma_diff",
    "v0_block",
    "w_bound",
];

pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    if records.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a ExperimentConfig,
    pub elapsed_seconds: f64,
    pub threads: usize,
    pub summary: T,
}

pub fn write_manifest<T: Serialize>(path: &Path, manifest: &Manifest<'_, T>) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(manifest)?)
        .with_context(|| format!("writing {}", path.display()))
}

/// Sidecar describing a `.bin` coefficient dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub grid: TorusGrid,
    pub components: usize,
    /// Always `"component-major, row-major coefficients, (re, im) little-endian f64"`.
    pub layout: String,
}

const LAYOUT: &str = "component-major, row-major coefficients, (re, im) little-endian f64";

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `path` (raw coefficients) and the JSON sidecar next to it.
pub fn write_field(path: &Path, field: &SpectralField) -> Result<()> {
    let mut bytes = Vec::with_capacity(field.num_components() * field.grid().len() * 16);
    for z in field.components().iter().flatten() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    let header = FieldHeader {
        grid: field.grid().clone(),
        components: field.num_components(),
        layout: LAYOUT.into(),
    };
    fs::write(sidecar(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<SpectralField> {
    let meta = sidecar(path);
    let header: FieldHeader = serde_json::from_str(
        &fs::read_to_string(&meta)
            .with_context(|| format!("reading sidecar {}", meta.display()))?,
    )?;
    if header.layout != LAYOUT {
        bail!("unsupported layout {:?}", header.layout);
    }
    let grid = TorusGrid::with_points(header.grid.period(), header.grid.points().to_vec())?;
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let expected = header.components * grid.len() * 16;
    if bytes.len() != expected {
        bail!(
            "{} holds {} bytes, sidecar implies {expected}",
            path.display(),
            bytes.len()
        );
    }
    let values: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    let components = values
        .chunks_exact(grid.len())
        .map(<[Complex64]>::to_vec)
        .collect();
    Ok(SpectralField::from_coefficients(&grid, components)?)
}
