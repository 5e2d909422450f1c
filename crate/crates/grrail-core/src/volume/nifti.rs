//! Minimal NIfTI-1 reader: dim, datatype, pixdim, vox_offset, scl_slope /
//! scl_inter, either endianness. Orientation (qform/sform) and extensions
//! are intentionally not interpreted; masks are assumed co-registered.

use super::{Dims, VoxelGrid};
use crate::error::{Error, Result};
use byteorder::{BigEndian, ByteOrder, LittleEndian};
use std::path::Path;

const HEADER_SIZE: usize = 348;
const OFF_DIM: usize = 40;
const OFF_DATATYPE: usize = 70;
const OFF_BITPIX: usize = 72;
const OFF_PIXDIM: usize = 76;
const OFF_VOX_OFFSET: usize = 108;
const OFF_SCL_SLOPE: usize = 112;
const OFF_SCL_INTER: usize = 116;
const OFF_MAGIC: usize = 344;

pub(super) fn looks_like_nifti(bytes: &[u8]) -> bool {
    bytes.len() >= HEADER_SIZE && matches!(&bytes[OFF_MAGIC..OFF_MAGIC + 4], b"n+1\0" | b"ni1\0")
}

pub fn read_nifti(path: &Path) -> Result<VoxelGrid> {
    let bytes = std::fs::read(path)?;
    read_nifti_bytes(&bytes, path)
}

pub(super) fn read_nifti_bytes(bytes: &[u8], path: &Path) -> Result<VoxelGrid> {
    if bytes.len() < HEADER_SIZE {
        return Err(Error::Parse("file shorter than a NIfTI-1 header".into()));
    }
    if !looks_like_nifti(bytes) {
        return Err(Error::Parse("missing NIfTI-1 magic".into()));
    }
    // Endianness: sizeof_hdr must decode to 348 one way or the other.
    let little = match (LittleEndian::read_i32(&bytes[0..4]), BigEndian::read_i32(&bytes[0..4])) {
        (348, _) => true,
        (_, 348) => false,
        _ => return Err(Error::Parse("sizeof_hdr is not 348 in either byte order".into())),
    };

    let rd_i16 = |off: usize| -> i16 {
        if little {
            LittleEndian::read_i16(&bytes[off..off + 2])
        } else {
            BigEndian::read_i16(&bytes[off..off + 2])
        }
    };
    let rd_f32 = |off: usize| -> f32 {
        if little {
            LittleEndian::read_f32(&bytes[off..off + 4])
        } else {
            BigEndian::read_f32(&bytes[off..off + 4])
        }
    };

    let ndim = rd_i16(OFF_DIM);
    if !(1..=7).contains(&ndim) {
        return Err(Error::Parse(format!("dim[0] = {ndim} outside 1..=7")));
    }
    let dim_at = |i: usize| rd_i16(OFF_DIM + 2 * i);
    // spatial dims; absent trailing dims default to 1
    let get_dim = |i: usize| -> Result<usize> {
        let d = if i as i16 <= ndim { dim_at(i) } else { 1 };
        if d < 1 {
            return Err(Error::Parse(format!("dim[{i}] = {d} must be >= 1")));
        }
        Ok(d as usize)
    };
    let (nx, ny, nz) = (get_dim(1)?, get_dim(2)?, get_dim(3)?);
    for i in 4..=(ndim as usize) {
        if dim_at(i) > 1 {
            return Err(Error::Parse(format!("dim[{i}] = {} — only 3D volumes are supported", dim_at(i))));
        }
    }
    let dims = Dims::new(nx, ny, nz)?;

    let datatype = rd_i16(OFF_DATATYPE);
    let (elem_size, expected_bitpix) = match datatype {
        2 => (1usize, 8i16),    // uint8
        4 => (2, 16),           // int16
        8 => (4, 32),           // int32
        16 => (4, 32),          // float32
        64 => (8, 64),          // float64
        other => return Err(Error::UnsupportedDatatype(other)),
    };
    let bitpix = rd_i16(OFF_BITPIX);
    if bitpix != expected_bitpix {
        return Err(Error::Parse(format!(
            "bitpix {bitpix} inconsistent with datatype {datatype}"
        )));
    }

    let mut spacing = [0.0f64; 3];
    for (i, s) in spacing.iter_mut().enumerate() {
        let p = rd_f32(OFF_PIXDIM + 4 * (i + 1)) as f64;
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Parse(format!("pixdim[{}] = {p} must be positive", i + 1)));
        }
        *s = p;
    }

    let slope = rd_f32(OFF_SCL_SLOPE) as f64;
    let inter = rd_f32(OFF_SCL_INTER) as f64;

    // "n+1" stores data in the same file at vox_offset; "ni1" in a companion
    // .img next to the header file.
    let nvox = dims.len();
    let payload: &[u8];
    let img_bytes;
    if &bytes[OFF_MAGIC..OFF_MAGIC + 4] == b"n+1\0" {
        let vox_offset = rd_f32(OFF_VOX_OFFSET);
        if !(vox_offset >= HEADER_SIZE as f32) || vox_offset.fract() != 0.0 {
            return Err(Error::Parse(format!("bad vox_offset {vox_offset}")));
        }
        let off = vox_offset as usize;
        if bytes.len() < off {
            return Err(Error::DataLengthMismatch { expected: nvox, actual: 0 });
        }
        payload = &bytes[off..];
    } else {
        let img_path = path.with_extension("img");
        img_bytes = std::fs::read(&img_path)?;
        payload = &img_bytes;
        let _ = &img_bytes; // keep alive
    }

    if payload.len() < nvox * elem_size {
        return Err(Error::DataLengthMismatch { expected: nvox, actual: payload.len() / elem_size });
    }
    let payload = &payload[..nvox * elem_size];

    let mut values = Vec::with_capacity(nvox);
    for i in 0..nvox {
        let off = i * elem_size;
        let raw = match (datatype, little) {
            (2, _) => payload[off] as f64,
            (4, true) => LittleEndian::read_i16(&payload[off..off + 2]) as f64,
            (4, false) => BigEndian::read_i16(&payload[off..off + 2]) as f64,
            (8, true) => LittleEndian::read_i32(&payload[off..off + 4]) as f64,
            (8, false) => BigEndian::read_i32(&payload[off..off + 4]) as f64,
            (16, true) => LittleEndian::read_f32(&payload[off..off + 4]) as f64,
            (16, false) => BigEndian::read_f32(&payload[off..off + 4]) as f64,
            (64, true) => LittleEndian::read_f64(&payload[off..off + 8]),
            (64, false) => BigEndian::read_f64(&payload[off..off + 8]),
            _ => unreachable!(),
        };
        // scl_slope == 0 means "no scaling" per the NIfTI-1 convention
        let v = if slope != 0.0 { slope * raw + inter } else { raw };
        values.push(v);
    }
    VoxelGrid::new(dims, spacing, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use byteorder::WriteBytesExt;

    /// Hand-assembled header so the reader is tested against raw bytes, not
    /// against its own writer.
    fn make_header(
        little: bool,
        dims: [i16; 3],
        pixdim: [f32; 3],
        datatype: i16,
        bitpix: i16,
        vox_offset: f32,
        slope: f32,
        inter: f32,
    ) -> Vec<u8> {
        let mut h = vec![0u8; 348];
        let w_i32 = |h: &mut [u8], off: usize, v: i32| {
            if little {
                LittleEndian::write_i32(&mut h[off..off + 4], v)
            } else {
                BigEndian::write_i32(&mut h[off..off + 4], v)
            }
        };
        let w_i16 = |h: &mut [u8], off: usize, v: i16| {
            if little {
                LittleEndian::write_i16(&mut h[off..off + 2], v)
            } else {
                BigEndian::write_i16(&mut h[off..off + 2], v)
            }
        };
        let w_f32 = |h: &mut [u8], off: usize, v: f32| {
            if little {
                LittleEndian::write_f32(&mut h[off..off + 4], v)
            } else {
                BigEndian::write_f32(&mut h[off..off + 4], v)
            }
        };
        w_i32(&mut h, 0, 348);
        w_i16(&mut h, OFF_DIM, 3);
        for (i, d) in dims.iter().enumerate() {
            w_i16(&mut h, OFF_DIM + 2 * (i + 1), *d);
        }
        w_i16(&mut h, OFF_DATATYPE, datatype);
        w_i16(&mut h, OFF_BITPIX, bitpix);
        w_f32(&mut h, OFF_PIXDIM, 1.0);
        for (i, p) in pixdim.iter().enumerate() {
            w_f32(&mut h, OFF_PIXDIM + 4 * (i + 1), *p);
        }
        w_f32(&mut h, OFF_VOX_OFFSET, vox_offset);
        w_f32(&mut h, OFF_SCL_SLOPE, slope);
        w_f32(&mut h, OFF_SCL_INTER, inter);
        h[OFF_MAGIC..OFF_MAGIC + 4].copy_from_slice(b"n+1\0");
        h
    }

    #[test]
    fn header_echo_dims_and_spacing() {
        let mut file = make_header(true, [10, 10, 5], [2.0, 2.0, 2.0], 16, 32, 352.0, 0.0, 0.0);
        file.resize(352, 0);
        for i in 0..(10 * 10 * 5) {
            file.write_f32::<LittleEndian>(i as f32).unwrap();
        }
        let grid = read_nifti_bytes(&file, Path::new("mem.nii")).unwrap();
        assert_eq!(grid.dims.as_tuple(), (10, 10, 5));
        assert_eq!(grid.spacing_mm, [2.0, 2.0, 2.0]);
        assert_eq!(grid.values[3], 3.0);
    }

    #[test]
    fn big_endian_int16_with_scaling() {
        let mut file = make_header(false, [2, 2, 2], [1.0, 1.0, 1.0], 4, 16, 352.0, 0.5, 10.0);
        file.resize(352, 0);
        for i in 0..8i16 {
            file.write_i16::<BigEndian>(i * 2).unwrap();
        }
        let grid = read_nifti_bytes(&file, Path::new("mem.nii")).unwrap();
        // v = 0.5 * raw + 10
        assert_eq!(grid.values[3], 0.5 * 6.0 + 10.0);
    }

    #[test]
    fn truncated_payload_is_length_mismatch() {
        let mut file = make_header(true, [10, 10, 10], [1.0; 3], 16, 32, 352.0, 0.0, 0.0);
        file.resize(352 + 900 * 4, 0);
        let err = read_nifti_bytes(&file, Path::new("mem.nii")).unwrap_err();
        assert!(err.to_string().contains("data length mismatch"), "{err}");
    }

    #[test]
    fn unsupported_datatype_is_rejected() {
        let mut file = make_header(true, [2, 2, 2], [1.0; 3], 128, 24, 352.0, 0.0, 0.0);
        file.resize(352 + 8 * 3, 0);
        assert!(matches!(
            read_nifti_bytes(&file, Path::new("mem.nii")),
            Err(Error::UnsupportedDatatype(128))
        ));
    }
}
