//! Checkpoints: raw little-endian `f64` values plus a JSON sidecar header.

use crate::error::{Error, Result};
use crate::field::Field2D;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub eps: f64,
    pub t: f64,
    pub step: usize,
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `path` (binary) and `path` with extension `.json` (header).
pub fn save(path: &Path, field: &Field2D, eps: f64, t: f64, step: usize) -> Result<()> {
    let bytes: Vec<u8> = field.u.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes)?;
    let header = CheckpointHeader {
        nx: field.nx,
        ny: field.ny,
        h: field.h,
        eps,
        t,
        step,
    };
    fs::write(sidecar(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(Field2D, CheckpointHeader)> {
    let header: CheckpointHeader = serde_json::from_str(&fs::read_to_string(sidecar(path))?)?;
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * header.nx * header.ny {
        return Err(Error::Checkpoint(format!(
            "{} bytes for a {}×{} grid",
            bytes.len(),
            header.nx,
            header.ny
        )));
    }
    let u = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let mut field = Field2D::constant(header.nx, header.ny, header.h, 0.0);
    field.u = u;
    Ok((field, header))
}
