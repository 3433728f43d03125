//! Binary field snapshots.
//!
//! Layout: a 32-byte header — magic `CFLD`, format version `u16`, `dim u16`,
//! rank `p u16`, rank `q u16`, per-axis node counts `u32` (one per axis),
//! zero padding to 32 bytes — followed by all components as little-endian
//! `f64`, row-major node order with the index tuple varying fastest.
//!
//! Axis lengths and the stencil order are run-manifest metadata, not part of
//! the snapshot; readers supply them to reconstruct the grid.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::grid::{ChartGrid, FdOrder};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"CFLD";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;

pub fn write_snapshot<T: Real, W: Write>(mut w: W, field: &TensorField<T>) -> Result<()> {
    let grid = field.grid();
    let (p, q) = field.rank();
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(MAGIC);
    header[4..6].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    header[6..8].copy_from_slice(&(grid.dim() as u16).to_le_bytes());
    header[8..10].copy_from_slice(&(p as u16).to_le_bytes());
    header[10..12].copy_from_slice(&(q as u16).to_le_bytes());
    let mut off = 12;
    for &n in grid.extents() {
        header[off..off + 4].copy_from_slice(&(n as u32).to_le_bytes());
        off += 4;
    }
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(field.components().len() * 8);
    for &v in field.components() {
        let x = v.to_f64().ok_or_else(|| Error::NonFinite {
            context: "snapshot serialization".to_string(),
        })?;
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Read a snapshot, rebuilding the grid from the header extents plus the
/// caller-supplied axis lengths and stencil order.
pub fn read_snapshot<T: Real, R: Read>(
    mut r: R,
    lengths: &[T],
    fd_order: FdOrder,
) -> Result<TensorField<T>> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::SnapshotFormat("bad magic".to_string()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::SnapshotFormat(format!(
            "unsupported format version {version}"
        )));
    }
    let dim = u16::from_le_bytes([header[6], header[7]]) as usize;
    let p = u16::from_le_bytes([header[8], header[9]]) as usize;
    let q = u16::from_le_bytes([header[10], header[11]]) as usize;
    if !(2..=4).contains(&dim) {
        return Err(Error::SnapshotFormat(format!("bad dimension {dim}")));
    }
    if lengths.len() != dim {
        return Err(Error::SnapshotFormat(format!(
            "snapshot is {dim}-dimensional but {} axis lengths were supplied",
            lengths.len()
        )));
    }
    let mut extents = Vec::with_capacity(dim);
    let mut off = 12;
    for _ in 0..dim {
        let n = u32::from_le_bytes([
            header[off],
            header[off + 1],
            header[off + 2],
            header[off + 3],
        ]) as usize;
        extents.push(n);
        off += 4;
    }
    let grid = Arc::new(ChartGrid::new(&extents, lengths, fd_order)?);
    let mut field = TensorField::zeros(grid, p, q);
    let n_comps = field.components().len();
    let mut buf = vec![0u8; n_comps * 8];
    r.read_exact(&mut buf)?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::SnapshotFormat(
            "trailing bytes after component data".to_string(),
        ));
    }
    for (i, chunk) in buf.chunks_exact(8).enumerate() {
        let x = f64::from_le_bytes(chunk.try_into().expect("chunk is 8 bytes"));
        field.components_mut()[i] = T::from_f64(x).ok_or_else(|| Error::NonFinite {
            context: "snapshot deserialization".to_string(),
        })?;
    }
    Ok(field)
}

pub fn save_snapshot<T: Real>(path: &Path, field: &TensorField<T>) -> Result<()> {
    let f = File::create(path)?;
    let mut w = BufWriter::new(f);
    write_snapshot(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot<T: Real>(
    path: &Path,
    lengths: &[T],
    fd_order: FdOrder,
) -> Result<TensorField<T>> {
    let f = File::open(path)?;
    read_snapshot(BufReader::new(f), lengths, fd_order)
}
