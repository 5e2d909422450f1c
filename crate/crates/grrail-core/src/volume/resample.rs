//! Isotropic resampling onto a `target_mm` grid.
//!
//! Voxel centers sit at `(i + 0.5) * spacing`, so output voxel `i` samples
//! the input at `u = (i + 0.5) * target / spacing - 0.5`, clamped to the edge
//! voxel rather than inventing background values. Intensities interpolate
//! per `mode`; masks always use nearest-neighbor.

use super::{Dims, RoiMask, VoxelGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResampleMode {
    Trilinear,
    Nearest,
}

impl std::str::FromStr for ResampleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trilinear" => Ok(ResampleMode::Trilinear),
            "nearest" => Ok(ResampleMode::Nearest),
            other => Err(Error::InvalidParam(format!("unknown resample mode '{other}'"))),
        }
    }
}

pub fn resample_isotropic(
    grid: &VoxelGrid,
    mask: &RoiMask,
    target_mm: f64,
    mode: ResampleMode,
) -> Result<(VoxelGrid, RoiMask)> {
    if !(target_mm > 0.0) || !target_mm.is_finite() {
        return Err(Error::InvalidParam(format!("target_mm must be positive, got {target_mm}")));
    }
    if grid.dims != mask.dims {
        return Err(Error::DimsMismatch { grid: grid.dims.as_tuple(), mask: mask.dims.as_tuple() });
    }

    let out_dim = |n: usize, s: f64| -> usize {
        ((n as f64 * s / target_mm).ceil() as usize).max(1)
    };
    let od = Dims::new(
        out_dim(grid.dims.nx, grid.spacing_mm[0]),
        out_dim(grid.dims.ny, grid.spacing_mm[1]),
        out_dim(grid.dims.nz, grid.spacing_mm[2]),
    )?;

    let src_coord = |i: usize, axis: usize| -> f64 {
        let u = (i as f64 + 0.5) * target_mm / grid.spacing_mm[axis] - 0.5;
        let max = match axis {
            0 => grid.dims.nx,
            1 => grid.dims.ny,
            _ => grid.dims.nz,
        } as f64
            - 1.0;
        u.clamp(0.0, max)
    };

    let ux: Vec<f64> = (0..od.nx).map(|i| src_coord(i, 0)).collect();
    let uy: Vec<f64> = (0..od.ny).map(|i| src_coord(i, 1)).collect();
    let uz: Vec<f64> = (0..od.nz).map(|i| src_coord(i, 2)).collect();

    let d = grid.dims;
    let mut out_values = Vec::with_capacity(od.len());
    let mut out_flags = Vec::with_capacity(od.len());
    for z in 0..od.nz {
        for y in 0..od.ny {
            for x in 0..od.nx {
                let (cx, cy, cz) = (ux[x], uy[y], uz[z]);
                let v = match mode {
                    ResampleMode::Trilinear => trilinear(grid, cx, cy, cz),
                    ResampleMode::Nearest => {
                        grid.at(nearest(cx, d.nx), nearest(cy, d.ny), nearest(cz, d.nz))
                    }
                };
                out_values.push(v);
                out_flags.push(mask.at(nearest(cx, d.nx), nearest(cy, d.ny), nearest(cz, d.nz)));
            }
        }
    }

    if !out_flags.iter().any(|&f| f) {
        return Err(Error::ResampledMaskEmpty);
    }
    let out_grid = VoxelGrid::new(od, [target_mm; 3], out_values)?;
    let out_mask = RoiMask::new(od, out_flags)?;
    Ok((out_grid, out_mask))
}

#[inline]
fn nearest(u: f64, n: usize) -> usize {
    (u.round() as usize).min(n - 1)
}

fn trilinear(grid: &VoxelGrid, x: f64, y: f64, z: f64) -> f64 {
    let d = grid.dims;
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let z0 = z.floor() as usize;
    let x1 = (x0 + 1).min(d.nx - 1);
    let y1 = (y0 + 1).min(d.ny - 1);
    let z1 = (z0 + 1).min(d.nz - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let fz = z - z0 as f64;

    let c000 = grid.at(x0, y0, z0);
    let c100 = grid.at(x1, y0, z0);
    let c010 = grid.at(x0, y1, z0);
    let c110 = grid.at(x1, y1, z0);
    let c001 = grid.at(x0, y0, z1);
    let c101 = grid.at(x1, y0, z1);
    let c011 = grid.at(x0, y1, z1);
    let c111 = grid.at(x1, y1, z1);

    let c00 = c000 * (1.0 - fx) + c100 * fx;
    let c10 = c010 * (1.0 - fx) + c110 * fx;
    let c01 = c001 * (1.0 - fx) + c101 * fx;
    let c11 = c011 * (1.0 - fx) + c111 * fx;
    let c0 = c00 * (1.0 - fy) + c10 * fy;
    let c1 = c01 * (1.0 - fy) + c11 * fy;
    c0 * (1.0 - fz) + c1 * fz
}
