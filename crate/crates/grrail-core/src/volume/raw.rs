//! The artifact's raw volume format: a plain-text header next to a
//! little-endian binary array.
//!
//! Header files are `key=value` lines (blank lines and `#` comments allowed):
//!
//! ```text
//! dims=64,64,48
//! spacing=1,1,1
//! dtype=f64
//! data=subject_vol.f64.bin
//! ```
//!
//! `dims` are (nx, ny, nz); the array is stored x-fastest. `dtype` is one of
//! `u8`, `i16`, `i32`, `f32`, `f64`. `data` is resolved relative to the
//! header's directory. Masks use the same container with nonzero = inside.

use super::{Dims, RoiMask, VoxelGrid};
use crate::error::{Error, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use std::io::Cursor;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dtype {
    U8,
    I16,
    I32,
    F32,
    F64,
}

impl Dtype {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "u8" => Ok(Dtype::U8),
            "i16" => Ok(Dtype::I16),
            "i32" => Ok(Dtype::I32),
            "f32" => Ok(Dtype::F32),
            "f64" => Ok(Dtype::F64),
            other => Err(Error::Parse(format!("unknown dtype '{other}'"))),
        }
    }

    fn size(self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::I16 => 2,
            Dtype::I32 => 4,
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

pub fn read_raw_header(path: &Path) -> Result<VoxelGrid> {
    let bytes = std::fs::read(path)?;
    read_raw_header_bytes(&bytes, path)
}

pub(super) fn read_raw_header_bytes(bytes: &[u8], header_path: &Path) -> Result<VoxelGrid> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::Parse("header is neither NIfTI nor utf-8 key=value text".into()))?;

    let mut dims = None;
    let mut spacing = None;
    let mut dtype = None;
    let mut data = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{line}'")))?;
        match key.trim() {
            "dims" => dims = Some(parse_triple_usize(value.trim())?),
            "spacing" => spacing = Some(parse_triple_f64(value.trim())?),
            "dtype" => dtype = Some(Dtype::parse(value.trim())?),
            "data" => data = Some(value.trim().to_string()),
            _ => {} // unknown keys are ignored for forward compatibility
        }
    }
    let (nx, ny, nz) = dims.ok_or_else(|| Error::Parse("missing 'dims'".into()))?;
    let spacing = spacing.ok_or_else(|| Error::Parse("missing 'spacing'".into()))?;
    let dtype = dtype.ok_or_else(|| Error::Parse("missing 'dtype'".into()))?;
    let data = data.ok_or_else(|| Error::Parse("missing 'data'".into()))?;

    let dims = Dims::new(nx, ny, nz)?;
    let data_path = header_path.parent().unwrap_or_else(|| Path::new(".")).join(&data);
    let payload = std::fs::read(&data_path)?;

    let nvox = dims.len();
    if payload.len() != nvox * dtype.size() {
        return Err(Error::DataLengthMismatch { expected: nvox, actual: payload.len() / dtype.size() });
    }
    let values = decode_le(&payload, dtype, nvox)?;
    VoxelGrid::new(dims, spacing, values)
}

fn decode_le(payload: &[u8], dtype: Dtype, nvox: usize) -> Result<Vec<f64>> {
    let mut cur = Cursor::new(payload);
    let mut values = Vec::with_capacity(nvox);
    for _ in 0..nvox {
        let v = match dtype {
            Dtype::U8 => cur.read_u8()? as f64,
            Dtype::I16 => cur.read_i16::<LittleEndian>()? as f64,
            Dtype::I32 => cur.read_i32::<LittleEndian>()? as f64,
            Dtype::F32 => cur.read_f32::<LittleEndian>()? as f64,
            Dtype::F64 => cur.read_f64::<LittleEndian>()?,
        };
        values.push(v);
    }
    Ok(values)
}

/// Writes a grid as `<stem>.rvh` (header) plus `<stem>.f64.bin` (payload),
/// where `header_path` supplies the stem. Returns nothing; the header is the
/// handle callers pass around afterwards.
pub fn write_raw_volume(grid: &VoxelGrid, header_path: &Path) -> Result<()> {
    let stem = header_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidParam("header path has no file stem".into()))?;
    let data_name = format!("{stem}.f64.bin");
    let mut payload = Vec::with_capacity(grid.values.len() * 8);
    for &v in &grid.values {
        payload.write_f64::<LittleEndian>(v)?;
    }
    let dir = header_path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::write(dir.join(&data_name), payload)?;
    let header = format!(
        "dims={},{},{}\nspacing={},{},{}\ndtype=f64\ndata={}\n",
        grid.dims.nx,
        grid.dims.ny,
        grid.dims.nz,
        grid.spacing_mm[0],
        grid.spacing_mm[1],
        grid.spacing_mm[2],
        data_name
    );
    std::fs::write(header_path, header)?;
    Ok(())
}

/// Writes a mask in the same container as volumes, dtype u8, 1 = inside.
pub fn write_raw_mask(mask: &RoiMask, spacing_mm: [f64; 3], header_path: &Path) -> Result<()> {
    let stem = header_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidParam("header path has no file stem".into()))?;
    let data_name = format!("{stem}.u8.bin");
    let payload: Vec<u8> = mask.flags.iter().map(|&f| u8::from(f)).collect();
    let dir = header_path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::write(dir.join(&data_name), payload)?;
    let header = format!(
        "dims={},{},{}\nspacing={},{},{}\ndtype=u8\ndata={}\n",
        mask.dims.nx, mask.dims.ny, mask.dims.nz, spacing_mm[0], spacing_mm[1], spacing_mm[2], data_name
    );
    std::fs::write(header_path, header)?;
    Ok(())
}

fn parse_triple_usize(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<_> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("expected three comma-separated values, got '{s}'")));
    }
    let p = |t: &str| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad integer '{t}'")));
    Ok((p(parts[0])?, p(parts[1])?, p(parts[2])?))
}

fn parse_triple_f64(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<_> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("expected three comma-separated values, got '{s}'")));
    }
    let p = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad float '{t}'")));
    Ok([p(parts[0])?, p(parts[1])?, p(parts[2])?])
}
