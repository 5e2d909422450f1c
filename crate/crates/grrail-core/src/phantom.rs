//! Synthetic ellipsoid phantoms with known sub-region structure, used to
//! validate the pipeline without clinical data.
//!
//! Homogeneous phantoms carry one smoothed Gaussian texture field over the
//! whole ROI; heterogeneous phantoms partition the ROI into seeded Voronoi
//! sub-regions, each with its own texture statistics. Smoothing is a masked
//! box filter so background values never bleed into the lesion.

use crate::error::{Error, Result};
use crate::hashing::mix64;
use crate::volume::{Dims, RoiMask, VoxelGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomClass {
    Homogeneous,
    Heterogeneous,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegionTexture {
    pub mean: f64,
    pub variance: f64,
    /// Box-filter radius in voxels; 0 disables smoothing.
    pub smooth_radius: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhantomSpec {
    /// Ellipsoid semi-axes in voxels; grid dims are `2*ceil(semi) + 2`.
    pub semi_axes: [f64; 3],
    pub class: PhantomClass,
    /// Sub-region count; must equal `regions.len()`.
    pub k: usize,
    pub regions: Vec<RegionTexture>,
    /// Std of white noise added after smoothing.
    pub noise: f64,
    pub seed: u64,
}

/// Minimum ROI voxels demanded per requested sub-region.
const MIN_VOXELS_PER_REGION: usize = 20;

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.semi_axes.iter().any(|&a| !(a >= 1.0) || !a.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "semi-axes must be >= 1 voxel, got {:?}",
                self.semi_axes
            )));
        }
        if self.k < 1 || self.k > 5 {
            return Err(Error::InvalidParam(format!("sub-region count {} outside 1..=5", self.k)));
        }
        if self.regions.len() != self.k {
            return Err(Error::InvalidParam(format!(
                "{} region textures for k = {}",
                self.regions.len(),
                self.k
            )));
        }
        if self.class == PhantomClass::Heterogeneous && self.k < 3 {
            return Err(Error::InvalidParam("heterogeneous phantoms need k >= 3".into()));
        }
        if self.regions.iter().any(|r| r.variance < 0.0 || !r.mean.is_finite()) {
            return Err(Error::InvalidParam("region texture parameters must be finite".into()));
        }
        if self.noise < 0.0 {
            return Err(Error::InvalidParam("noise must be >= 0".into()));
        }
        // pairwise mean separation of at least 3 pooled stds
        for i in 0..self.k {
            for j in (i + 1)..self.k {
                let pooled =
                    ((self.regions[i].variance + self.regions[j].variance) / 2.0).sqrt();
                let sep = (self.regions[i].mean - self.regions[j].mean).abs();
                if self.k > 1 && sep < 3.0 * pooled {
                    return Err(Error::InvalidParam(format!(
                        "regions {i} and {j} separated by {sep:.3} < 3 pooled std {:.3}",
                        3.0 * pooled
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Generates the phantom volume, its ellipsoid mask, and the class label.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<(VoxelGrid, RoiMask, PhantomClass)> {
    spec.validate()?;
    let dims = Dims::new(
        2 * spec.semi_axes[0].ceil() as usize + 2,
        2 * spec.semi_axes[1].ceil() as usize + 2,
        2 * spec.semi_axes[2].ceil() as usize + 2,
    )?;
    let center = [
        (dims.nx - 1) as f64 / 2.0,
        (dims.ny - 1) as f64 / 2.0,
        (dims.nz - 1) as f64 / 2.0,
    ];
    let mut flags = vec![false; dims.len()];
    let mut roi_voxels = Vec::new();
    for z in 0..dims.nz {
        for y in 0..dims.ny {
            for x in 0..dims.nx {
                let r2 = ((x as f64 - center[0]) / spec.semi_axes[0]).powi(2)
                    + ((y as f64 - center[1]) / spec.semi_axes[1]).powi(2)
                    + ((z as f64 - center[2]) / spec.semi_axes[2]).powi(2);
                if r2 <= 1.0 {
                    let idx = dims.index(x, y, z);
                    flags[idx] = true;
                    roi_voxels.push(idx);
                }
            }
        }
    }
    if roi_voxels.len() < MIN_VOXELS_PER_REGION * spec.k {
        return Err(Error::RoiTooSmall(format!(
            "{} ROI voxels cannot host {} sub-regions (need >= {})",
            roi_voxels.len(),
            spec.k,
            MIN_VOXELS_PER_REGION * spec.k
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // region assignment: whole ROI for k = 1, nearest seeded site otherwise
    let region_of: Vec<usize> = if spec.k == 1 {
        vec![0; roi_voxels.len()]
    } else {
        let site_positions = rand::seq::index::sample(&mut rng, roi_voxels.len(), spec.k);
        let sites: Vec<(f64, f64, f64)> = site_positions
            .iter()
            .map(|p| {
                let (x, y, z) = dims.coords(roi_voxels[p]);
                (x as f64, y as f64, z as f64)
            })
            .collect();
        roi_voxels
            .iter()
            .map(|&idx| {
                let (x, y, z) = dims.coords(idx);
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (s, &(sx, sy, sz)) in sites.iter().enumerate() {
                    let d = (x as f64 - sx).powi(2) + (y as f64 - sy).powi(2) + (z as f64 - sz).powi(2);
                    if d < best_d {
                        best_d = d;
                        best = s;
                    }
                }
                best
            })
            .collect()
    };

    // per-voxel white noise in ROI linear order
    let mut values = vec![0.0f64; dims.len()];
    for (pos, &idx) in roi_voxels.iter().enumerate() {
        let region = &spec.regions[region_of[pos]];
        let z: f64 = StandardNormal.sample(&mut rng);
        values[idx] = region.mean + region.variance.sqrt() * z;
    }

    // masked box smoothing, radius per region (taken from the voxel's own
    // region), normalized over in-ROI neighbors only
    let max_radius = spec.regions.iter().map(|r| r.smooth_radius).max().unwrap_or(0);
    if max_radius > 0 {
        let mut smoothed = values.clone();
        for (pos, &idx) in roi_voxels.iter().enumerate() {
            let r = spec.regions[region_of[pos]].smooth_radius as i64;
            if r == 0 {
                continue;
            }
            let (x, y, z) = dims.coords(idx);
            let mut sum = 0.0;
            let mut count = 0usize;
            for dz in -r..=r {
                for dy in -r..=r {
                    for dx in -r..=r {
                        let (nx, ny, nz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                        if nx < 0
                            || ny < 0
                            || nz < 0
                            || nx >= dims.nx as i64
                            || ny >= dims.ny as i64
                            || nz >= dims.nz as i64
                        {
                            continue;
                        }
                        let nidx = dims.index(nx as usize, ny as usize, nz as usize);
                        if flags[nidx] {
                            sum += values[nidx];
                            count += 1;
                        }
                    }
                }
            }
            smoothed[idx] = sum / count as f64;
        }
        values = smoothed;
    }

    // global additive noise after smoothing
    if spec.noise > 0.0 {
        for &idx in &roi_voxels {
            let z: f64 = StandardNormal.sample(&mut rng);
            values[idx] += spec.noise * z;
        }
    }

    let grid = VoxelGrid::new(dims, [1.0; 3], values)?;
    let mask = RoiMask::new(dims, flags)?;
    Ok((grid, mask, spec.class))
}

/// One subject of a seeded cohort: homogeneous phantoms are single-region,
/// heterogeneous ones carry 3-5 well-separated Voronoi sub-regions. The
/// `size` parameter is the target grid edge in voxels.
pub fn cohort_spec(class: PhantomClass, subject: usize, size: usize, master_seed: u64) -> PhantomSpec {
    let seed = mix64(master_seed, (subject as u64) << 1 | u64::from(class == PhantomClass::Heterogeneous));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let semi = (size as f64 - 2.0) / 2.0;
    let jitter = |rng: &mut ChaCha8Rng| {
        let z: f64 = StandardNormal.sample(rng);
        (semi - 1.0 + z.clamp(-1.0, 1.0)).max(4.0)
    };
    let semi_axes = [jitter(&mut rng), jitter(&mut rng), jitter(&mut rng)];
    let base_mean = {
        let z: f64 = StandardNormal.sample(&mut rng);
        100.0 + 10.0 * z
    };
    let sigma = 4.0;
    match class {
        PhantomClass::Homogeneous => PhantomSpec {
            semi_axes,
            class,
            k: 1,
            regions: vec![RegionTexture { mean: base_mean, variance: sigma * sigma, smooth_radius: 1 }],
            noise: 1.0,
            seed,
        },
        PhantomClass::Heterogeneous => {
            let k = 3 + subject % 3;
            let sep = 3.5 * sigma;
            let regions = (0..k)
                .map(|i| RegionTexture {
                    mean: base_mean + (i as f64 - (k as f64 - 1.0) / 2.0) * sep,
                    variance: sigma * sigma,
                    smooth_radius: 1,
                })
                .collect();
            PhantomSpec { semi_axes, class, k, regions, noise: 1.0, seed }
        }
    }
}
