//! 3D volumes, ROI masks, and the on-disk formats the pipeline consumes.
//!
//! Grids store values densely in x-fastest order: `idx = x + nx*(y + ny*z)`.
//! All types are immutable after construction and safe to share across
//! threads; every operation here is a pure function.

mod nifti;
mod raw;
mod resample;

pub use nifti::read_nifti;
pub use raw::{read_raw_header, write_raw_mask, write_raw_volume};
pub use resample::{resample_isotropic, ResampleMode};

use crate::error::{Error, Result};
use std::path::Path;
use std::sync::Arc;

/// Grid extents. Components are at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidParam(format!(
                "dims components must be >= 1, got ({nx}, {ny}, {nz})"
            )));
        }
        Ok(Dims { nx, ny, nz })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false // components are >= 1 by construction
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.nx * (y + self.ny * z)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let x = idx % self.nx;
        let y = (idx / self.nx) % self.ny;
        let z = idx / (self.nx * self.ny);
        (x, y, z)
    }

    pub fn as_tuple(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }
}

/// Dense 3D scalar field with voxel spacing in millimetres.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub dims: Dims,
    pub spacing_mm: [f64; 3],
    pub values: Vec<f64>,
}

impl VoxelGrid {
    pub fn new(dims: Dims, spacing_mm: [f64; 3], values: Vec<f64>) -> Result<Self> {
        if spacing_mm.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "spacing components must be positive, got {spacing_mm:?}"
            )));
        }
        if values.len() != dims.len() {
            return Err(Error::DataLengthMismatch { expected: dims.len(), actual: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("voxel values".into()));
        }
        Ok(VoxelGrid { dims, spacing_mm, values })
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[self.dims.index(x, y, z)]
    }
}

/// Boolean region of interest over the same grid as its companion volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiMask {
    pub dims: Dims,
    pub flags: Vec<bool>,
}

impl RoiMask {
    pub fn new(dims: Dims, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != dims.len() {
            return Err(Error::DataLengthMismatch { expected: dims.len(), actual: flags.len() });
        }
        if !flags.iter().any(|&f| f) {
            return Err(Error::EmptyRoi);
        }
        Ok(RoiMask { dims, flags })
    }

    pub fn roi_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> bool {
        self.flags[self.dims.index(x, y, z)]
    }
}

/// Precomputed ROI indexing shared by feature maps and cluster maps: the
/// sorted linear indices of ROI voxels plus a dense reverse lookup.
#[derive(Debug)]
pub struct RoiIndex {
    pub dims: Dims,
    /// Linear indices of ROI voxels, ascending.
    pub linear: Vec<usize>,
    /// For each grid voxel, its position in `linear`, or -1 outside the ROI.
    dense: Vec<i64>,
}

impl RoiIndex {
    pub fn build(mask: &RoiMask) -> Arc<Self> {
        let mut linear = Vec::with_capacity(mask.flags.len() / 4);
        let mut dense = vec![-1i64; mask.flags.len()];
        for (idx, &inside) in mask.flags.iter().enumerate() {
            if inside {
                dense[idx] = linear.len() as i64;
                linear.push(idx);
            }
        }
        Arc::new(RoiIndex { dims: mask.dims, linear, dense })
    }

    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }

    /// Position of a grid voxel inside the ROI ordering, if any.
    #[inline]
    pub fn pos_of(&self, linear_idx: usize) -> Option<usize> {
        let p = self.dense[linear_idx];
        (p >= 0).then_some(p as usize)
    }

    #[inline]
    pub fn contains(&self, linear_idx: usize) -> bool {
        self.dense[linear_idx] >= 0
    }
}

/// Confirms that a grid/mask pair is usable: equal dims, non-empty ROI,
/// finite values. Returns the ROI voxel count.
pub fn validate_pair(grid: &VoxelGrid, mask: &RoiMask) -> Result<usize> {
    if grid.dims != mask.dims {
        return Err(Error::DimsMismatch { grid: grid.dims.as_tuple(), mask: mask.dims.as_tuple() });
    }
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("voxel values".into()));
    }
    let n = mask.roi_count();
    if n == 0 {
        return Err(Error::EmptyRoi);
    }
    Ok(n)
}

/// Loads a volume from either a NIfTI-1 file or the raw key=value format,
/// sniffing by the NIfTI magic. Values are promoted to f64.
pub fn load_volume(path: &Path) -> Result<VoxelGrid> {
    let bytes = std::fs::read(path)?;
    if nifti::looks_like_nifti(&bytes) {
        nifti::read_nifti_bytes(&bytes, path)
    } else {
        raw::read_raw_header_bytes(&bytes, path)
    }
}

/// Loads a mask from the same containers as `load_volume`; any nonzero voxel
/// is inside the ROI.
pub fn load_mask(path: &Path) -> Result<RoiMask> {
    let grid = load_volume(path)?;
    let flags = grid.values.iter().map(|&v| v != 0.0).collect();
    RoiMask::new(grid.dims, flags)
}
