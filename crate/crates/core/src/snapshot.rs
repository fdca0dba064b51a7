//! Binary state snapshots and plain-text sidecar metadata.
//!
//! Snapshot layout (little-endian throughout):
//!
//! ```text
//! offset  size  content
//! 0       4     magic "ADAS"
//! 4       4     format version, u32 (currently 1)
//! 8       4     n, grid resolution per axis, u32
//! 12      8     L, box side length, f64
//! 20      4     component count, u32 (1 scalar, 3 vector)
//! 24      4     layout tag, u32 (1 = physical f64 samples, x-fastest)
//! 28      36    reserved, zero
//! 64      -     n³ f64 samples per component, x-fastest, components in order
//! ```
//!
//! The sidecar is a `key = value` text file next to the snapshot carrying
//! run metadata (model parameters, time, step size, seeds).

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use ndarray::Array3;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"ADAS";
pub const VERSION: u32 = 1;
pub const LAYOUT_PHYS_F64_X_FASTEST: u32 = 1;
pub const HEADER_LEN: usize = 64;

/// Raw snapshot contents before attachment to a grid.
#[derive(Debug, Clone)]
pub struct SnapshotData {
    pub n: usize,
    pub length: f64,
    pub components: Vec<Array3<f64>>,
}

impl SnapshotData {
    pub fn into_vector_field(self, grid: Grid) -> Result<VectorField> {
        self.check_grid(grid)?;
        if self.components.len() != 3 {
            return Err(Error::SnapshotFormat(format!(
                "expected 3 components, snapshot has {}",
                self.components.len()
            )));
        }
        VectorField::from_physical(
            grid,
            [
                &self.components[0],
                &self.components[1],
                &self.components[2],
            ],
        )
    }

    pub fn into_scalar_field(self, grid: Grid) -> Result<ScalarField> {
        self.check_grid(grid)?;
        if self.components.len() != 1 {
            return Err(Error::SnapshotFormat(format!(
                "expected 1 component, snapshot has {}",
                self.components.len()
            )));
        }
        ScalarField::from_physical(grid, &self.components[0])
    }

    fn check_grid(&self, grid: Grid) -> Result<()> {
        if self.n != grid.n() || (self.length - grid.length()).abs() > 1e-12 * grid.length() {
            return Err(Error::GridMismatch(format!(
                "snapshot n = {}, L = {} vs grid n = {}, L = {}",
                self.n,
                self.length,
                grid.n(),
                grid.length()
            )));
        }
        Ok(())
    }
}

fn encode_header(n: usize, length: f64, ncomp: usize) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[0..4].copy_from_slice(MAGIC);
    h[4..8].copy_from_slice(&VERSION.to_le_bytes());
    h[8..12].copy_from_slice(&(n as u32).to_le_bytes());
    h[12..20].copy_from_slice(&length.to_le_bytes());
    h[20..24].copy_from_slice(&(ncomp as u32).to_le_bytes());
    h[24..28].copy_from_slice(&LAYOUT_PHYS_F64_X_FASTEST.to_le_bytes());
    h
}

fn write_components(path: &Path, n: usize, length: f64, comps: &[Array3<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_header(n, length, comps.len()))?;
    for comp in comps {
        // x-fastest order is the natural iteration order of the [z][y][x] array
        for v in comp.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_vector_snapshot(path: &Path, field: &VectorField) -> Result<()> {
    let phys = field.to_physical()?;
    write_components(path, field.grid().n(), field.grid().length(), &phys)
}

pub fn write_scalar_snapshot(path: &Path, field: &ScalarField) -> Result<()> {
    let phys = field.to_physical()?;
    write_components(
        path,
        field.grid().n(),
        field.grid().length(),
        std::slice::from_ref(&phys),
    )
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotData> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| Error::SnapshotFormat("file shorter than the 64-byte header".into()))?;
    if &header[0..4] != MAGIC {
        return Err(Error::SnapshotFormat(format!(
            "bad magic {:?}, expected {:?}",
            &header[0..4],
            MAGIC
        )));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::SnapshotFormat(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let n = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let length = f64::from_le_bytes(header[12..20].try_into().unwrap());
    let ncomp = u32::from_le_bytes(header[20..24].try_into().unwrap()) as usize;
    let layout = u32::from_le_bytes(header[24..28].try_into().unwrap());
    if layout != LAYOUT_PHYS_F64_X_FASTEST {
        return Err(Error::SnapshotFormat(format!("unknown layout tag {layout}")));
    }
    if ncomp == 0 || ncomp > 3 {
        return Err(Error::SnapshotFormat(format!(
            "component count {ncomp} out of range 1..=3"
        )));
    }
    let mut components = Vec::with_capacity(ncomp);
    let mut buf = vec![0u8; n * n * n * 8];
    for _ in 0..ncomp {
        r.read_exact(&mut buf)
            .map_err(|_| Error::SnapshotFormat("truncated sample data".into()))?;
        let mut arr = Array3::zeros((n, n, n));
        for (i, v) in arr.iter_mut().enumerate() {
            *v = f64::from_le_bytes(buf[8 * i..8 * i + 8].try_into().unwrap());
        }
        components.push(arr);
    }
    Ok(SnapshotData {
        n,
        length,
        components,
    })
}

/// Write sidecar metadata as `key = value` lines, keys in the given order.
pub fn write_sidecar(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => out.push((k.trim().to_string(), v.trim().to_string())),
            None => {
                return Err(Error::SnapshotFormat(format!(
                    "sidecar line without '=': {line}"
                )))
            }
        }
    }
    Ok(out)
}
