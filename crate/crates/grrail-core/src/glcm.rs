//! Voxel-wise GLCM texture maps.
//!
//! Each ROI voxel gets a 3x3x3 window; co-occurrences are pooled over the 13
//! unique distance-1 directions (counted symmetrically, both endpoints inside
//! the window and the ROI), normalized, and reduced to 13 scalar texture
//! features. Windows are cropped at volume edges and never see non-ROI
//! intensities; a window with no in-ROI pairs degenerates to a delta matrix
//! at the center voxel's level.

use crate::error::{Error, Result};
use crate::volume::{Dims, RoiIndex, RoiMask, VoxelGrid};
use rayon::prelude::*;
use std::sync::Arc;

/// The 13 unique 3D offset directions at Chebyshev distance 1 (the other 13
/// are their negations; symmetric counting covers both).
pub const OFFSETS_13: [(i64, i64, i64); 13] = [
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 0),
    (1, -1, 0),
    (1, 0, 1),
    (1, 0, -1),
    (0, 1, 1),
    (0, 1, -1),
    (1, 1, 1),
    (1, 1, -1),
    (1, -1, 1),
    (1, -1, -1),
];

/// Level assigned to voxels outside the ROI.
pub const LEVEL_SENTINEL: u16 = u16::MAX;

/// The 13 texture features, in the fixed map order the descriptor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureId {
    Energy,
    Entropy,
    Contrast,
    Correlation,
    Homogeneity,
    SumAverage,
    SumVariance,
    SumEntropy,
    DifferenceEntropy,
    DifferenceAverage,
    DifferenceVariance,
    Icm1,
    Icm2,
}

impl FeatureId {
    pub const ALL: [FeatureId; 13] = [
        FeatureId::Energy,
        FeatureId::Entropy,
        FeatureId::Contrast,
        FeatureId::Correlation,
        FeatureId::Homogeneity,
        FeatureId::SumAverage,
        FeatureId::SumVariance,
        FeatureId::SumEntropy,
        FeatureId::DifferenceEntropy,
        FeatureId::DifferenceAverage,
        FeatureId::DifferenceVariance,
        FeatureId::Icm1,
        FeatureId::Icm2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureId::Energy => "energy",
            FeatureId::Entropy => "entropy",
            FeatureId::Contrast => "contrast",
            FeatureId::Correlation => "correlation",
            FeatureId::Homogeneity => "homogeneity",
            FeatureId::SumAverage => "sum_average",
            FeatureId::SumVariance => "sum_variance",
            FeatureId::SumEntropy => "sum_entropy",
            FeatureId::DifferenceEntropy => "difference_entropy",
            FeatureId::DifferenceAverage => "difference_average",
            FeatureId::DifferenceVariance => "difference_variance",
            FeatureId::Icm1 => "icm1",
            FeatureId::Icm2 => "icm2",
        }
    }

    pub fn from_name(name: &str) -> Option<FeatureId> {
        FeatureId::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// ROI intensities quantized to `bins` equal-width levels.
#[derive(Debug)]
pub struct QuantizedRoi {
    pub dims: Dims,
    pub bins: usize,
    /// Dense per-voxel level; `LEVEL_SENTINEL` outside the ROI.
    pub levels: Vec<u16>,
    pub roi: Arc<RoiIndex>,
}

/// Normalized symmetric co-occurrence matrix over `b` levels.
#[derive(Debug, Clone)]
pub struct CoocMatrix {
    pub b: usize,
    /// Row-major `b*b` probabilities summing to 1.
    pub p: Vec<f64>,
}

impl CoocMatrix {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.b + j]
    }
}

/// One texture feature evaluated at every ROI voxel.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    pub dims: Dims,
    pub feature: FeatureId,
    pub bins: usize,
    pub roi: Arc<RoiIndex>,
    /// Aligned with `roi.linear`.
    pub values: Vec<f64>,
}

/// Equal-width quantization of the ROI intensity range into `bins` levels.
/// The maximum maps to `bins - 1`; a constant ROI maps everything to 0.
pub fn quantize_roi(grid: &VoxelGrid, mask: &RoiMask, bins: usize) -> Result<QuantizedRoi> {
    if bins < 2 {
        return Err(Error::InvalidParam(format!("bin count must be >= 2, got {bins}")));
    }
    crate::volume::validate_pair(grid, mask)?;
    let roi = RoiIndex::build(mask);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &idx in &roi.linear {
        let v = grid.values[idx];
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let range = hi - lo;
    let mut levels = vec![LEVEL_SENTINEL; grid.dims.len()];
    for &idx in &roi.linear {
        let level = if range > 0.0 {
            let l = ((grid.values[idx] - lo) / range * bins as f64).floor() as usize;
            l.min(bins - 1)
        } else {
            0
        };
        levels[idx] = level as u16;
    }
    Ok(QuantizedRoi { dims: grid.dims, bins, levels, roi })
}

/// Pooled symmetric co-occurrence matrix of the 3x3x3 window centered on an
/// ROI voxel, restricted to in-window, in-ROI voxel pairs.
pub fn window_cooc(q: &QuantizedRoi, center: (usize, usize, usize)) -> Result<CoocMatrix> {
    let (cx, cy, cz) = center;
    let d = q.dims;
    let center_idx = d.index(cx, cy, cz);
    if q.levels[center_idx] == LEVEL_SENTINEL {
        return Err(Error::OutsideRoi);
    }
    let b = q.bins;
    let mut counts = vec![0.0f64; b * b];
    accumulate_window(q, cx, cy, cz, &mut counts);
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        let l = q.levels[center_idx] as usize;
        counts[l * b + l] = 1.0;
    } else {
        for c in counts.iter_mut() {
            *c /= total;
        }
    }
    Ok(CoocMatrix { b, p: counts })
}

#[inline]
fn accumulate_window(q: &QuantizedRoi, cx: usize, cy: usize, cz: usize, counts: &mut [f64]) {
    let d = q.dims;
    let b = q.bins;
    let x0 = cx.saturating_sub(1) as i64;
    let y0 = cy.saturating_sub(1) as i64;
    let z0 = cz.saturating_sub(1) as i64;
    let x1 = (cx + 1).min(d.nx - 1) as i64;
    let y1 = (cy + 1).min(d.ny - 1) as i64;
    let z1 = (cz + 1).min(d.nz - 1) as i64;
    for z in z0..=z1 {
        for y in y0..=y1 {
            for x in x0..=x1 {
                let la = q.levels[d.index(x as usize, y as usize, z as usize)];
                if la == LEVEL_SENTINEL {
                    continue;
                }
                for &(dx, dy, dz) in &OFFSETS_13 {
                    let (nx, ny, nz) = (x + dx, y + dy, z + dz);
                    if nx < x0 || nx > x1 || ny < y0 || ny > y1 || nz < z0 || nz > z1 {
                        continue;
                    }
                    let lb = q.levels[d.index(nx as usize, ny as usize, nz as usize)];
                    if lb == LEVEL_SENTINEL {
                        continue;
                    }
                    counts[la as usize * b + lb as usize] += 1.0;
                    counts[lb as usize * b + la as usize] += 1.0;
                }
            }
        }
    }
}

/// The 13 Haralick features of a normalized co-occurrence matrix, in
/// `FeatureId::ALL` order. Logs are base 2 with `p log p := 0` at `p = 0`.
pub fn haralick13(m: &CoocMatrix) -> [f64; 13] {
    let b = m.b;
    let mut px = vec![0.0; b];
    let mut py = vec![0.0; b];
    let mut p_sum = vec![0.0; 2 * b - 1];
    let mut p_diff = vec![0.0; b];

    let mut energy = 0.0;
    let mut entropy = 0.0;
    let mut contrast = 0.0;
    let mut homogeneity = 0.0;
    for i in 0..b {
        for j in 0..b {
            let p = m.at(i, j);
            if p == 0.0 {
                continue;
            }
            px[i] += p;
            py[j] += p;
            p_sum[i + j] += p;
            p_diff[i.abs_diff(j)] += p;
            energy += p * p;
            entropy -= p * p.log2();
            let dij = i as f64 - j as f64;
            contrast += dij * dij * p;
            homogeneity += p / (1.0 + dij * dij);
        }
    }

    let mut mu_x = 0.0;
    let mut mu_y = 0.0;
    for i in 0..b {
        mu_x += i as f64 * px[i];
        mu_y += i as f64 * py[i];
    }
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for i in 0..b {
        var_x += (i as f64 - mu_x).powi(2) * px[i];
        var_y += (i as f64 - mu_y).powi(2) * py[i];
    }
    let sig = (var_x * var_y).sqrt();
    let correlation = if sig > 0.0 {
        let mut cov = 0.0;
        for i in 0..b {
            for j in 0..b {
                let p = m.at(i, j);
                if p != 0.0 {
                    cov += (i as f64 - mu_x) * (j as f64 - mu_y) * p;
                }
            }
        }
        cov / sig
    } else {
        0.0
    };

    let mut sum_average = 0.0;
    let mut sum_entropy = 0.0;
    for (k, &p) in p_sum.iter().enumerate() {
        if p > 0.0 {
            sum_average += k as f64 * p;
            sum_entropy -= p * p.log2();
        }
    }
    let mut sum_variance = 0.0;
    for (k, &p) in p_sum.iter().enumerate() {
        if p > 0.0 {
            sum_variance += (k as f64 - sum_average).powi(2) * p;
        }
    }

    let mut diff_average = 0.0;
    let mut diff_entropy = 0.0;
    for (k, &p) in p_diff.iter().enumerate() {
        if p > 0.0 {
            diff_average += k as f64 * p;
            diff_entropy -= p * p.log2();
        }
    }
    let mut diff_variance = 0.0;
    for (k, &p) in p_diff.iter().enumerate() {
        if p > 0.0 {
            diff_variance += (k as f64 - diff_average).powi(2) * p;
        }
    }

    let mut hx = 0.0;
    let mut hy = 0.0;
    for i in 0..b {
        if px[i] > 0.0 {
            hx -= px[i] * px[i].log2();
        }
        if py[i] > 0.0 {
            hy -= py[i] * py[i].log2();
        }
    }
    let hxy = entropy;
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..b {
        for j in 0..b {
            let q = px[i] * py[j];
            if q > 0.0 {
                let p = m.at(i, j);
                if p > 0.0 {
                    hxy1 -= p * q.log2();
                }
                hxy2 -= q * q.log2();
            }
        }
    }
    let denom = hx.max(hy);
    let icm1 = if denom > 0.0 { (hxy - hxy1) / denom } else { 0.0 };
    let icm2 = (1.0 - (-2.0 * (hxy2 - hxy)).exp()).max(0.0).sqrt();

    [
        energy,
        entropy,
        contrast,
        correlation,
        homogeneity,
        sum_average,
        sum_variance,
        sum_entropy,
        diff_entropy,
        diff_average,
        diff_variance,
        icm1,
        icm2,
    ]
}

/// Computes all 13 feature maps over the ROI. Data-parallel across voxels;
/// outputs are independent of the worker count.
pub fn extract_feature_maps(grid: &VoxelGrid, mask: &RoiMask, bins: usize) -> Result<Vec<FeatureMap>> {
    crate::volume::validate_pair(grid, mask)?;
    let q = quantize_roi(grid, mask, bins)?;
    let d = q.dims;

    let rows: Vec<[f64; 13]> = q
        .roi
        .linear
        .par_iter()
        .map(|&idx| {
            let (x, y, z) = d.coords(idx);
            let b = q.bins;
            let mut counts = vec![0.0f64; b * b];
            accumulate_window(&q, x, y, z, &mut counts);
            let total: f64 = counts.iter().sum();
            if total == 0.0 {
                let l = q.levels[idx] as usize;
                counts[l * b + l] = 1.0;
            } else {
                for c in counts.iter_mut() {
                    *c /= total;
                }
            }
            haralick13(&CoocMatrix { b, p: counts })
        })
        .collect();

    let maps = FeatureId::ALL
        .iter()
        .enumerate()
        .map(|(fi, &feature)| {
            let values: Vec<f64> = rows.iter().map(|r| r[fi]).collect();
            debug_assert!(values.iter().all(|v| v.is_finite()), "{:?} produced non-finite values", feature);
            FeatureMap { dims: d, feature, bins, roi: Arc::clone(&q.roi), values }
        })
        .collect();
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::RoiMask;

    fn grid_from(dims: Dims, values: Vec<f64>) -> VoxelGrid {
        VoxelGrid::new(dims, [1.0; 3], values).unwrap()
    }

    fn full_mask(dims: Dims) -> RoiMask {
        RoiMask::new(dims, vec![true; dims.len()]).unwrap()
    }

    #[test]
    fn quantize_one_value_per_bin() {
        let d = Dims::new(4, 1, 1).unwrap();
        let grid = grid_from(d, vec![0.0, 1.0, 2.0, 3.0]);
        let q = quantize_roi(&grid, &full_mask(d), 4).unwrap();
        assert_eq!(&q.levels[..4], &[0, 1, 2, 3]);
    }

    #[test]
    fn quantize_constant_roi_is_level_zero() {
        let d = Dims::new(2, 2, 2).unwrap();
        let grid = grid_from(d, vec![9.5; 8]);
        let q = quantize_roi(&grid, &full_mask(d), 16).unwrap();
        assert!(q.levels.iter().all(|&l| l == 0));
    }

    #[test]
    fn quantize_uniform_fills_bins_evenly() {
        use rand::{Rng, SeedableRng};
        let n = 10_000;
        let d = Dims::new(n, 1, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..100.0)).collect();
        let grid = grid_from(d, values.clone());
        let q = quantize_roi(&grid, &full_mask(d), 4).unwrap();
        // direct histogram oracle on the same draw
        let mut counts = [0usize; 4];
        for &l in &q.levels[..n] {
            counts[l as usize] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - 2500.0).abs() < 250.0,
                "bin {k} occupancy {c} too far from uniform"
            );
        }
    }

    #[test]
    fn quantization_is_monotone() {
        use rand::{Rng, SeedableRng};
        let n = 500;
        let d = Dims::new(n, 1, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..17.0)).collect();
        let grid = grid_from(d, values.clone());
        let q = quantize_roi(&grid, &full_mask(d), 16).unwrap();
        for i in 0..n {
            for j in 0..n {
                if values[i] <= values[j] {
                    assert!(q.levels[i] <= q.levels[j]);
                }
            }
        }
    }

    #[test]
    fn constant_window_is_delta() {
        // ramp voxels at z=0 pin the quantization range [0,3] so the plateau
        // value 2.0 lands on level 2; the window at (1,1,2) sees plateau only
        let d = Dims::new(3, 3, 3).unwrap();
        let mut values = vec![2.0; 27];
        for (i, v) in values.iter_mut().enumerate().take(4) {
            *v = i as f64;
        }
        let grid = grid_from(d, values);
        let q = quantize_roi(&grid, &full_mask(d), 4).unwrap();
        let m = window_cooc(&q, (1, 1, 2)).unwrap();
        assert_eq!(m.at(2, 2), 1.0);
        assert_eq!(m.p.iter().filter(|&&p| p != 0.0).count(), 1);
    }

    #[test]
    fn isolated_voxel_degenerates_to_delta() {
        let d = Dims::new(5, 5, 5).unwrap();
        let mut values = vec![0.0; d.len()];
        values[d.index(2, 2, 2)] = 3.0;
        values[d.index(0, 0, 0)] = 0.0;
        values[d.index(4, 4, 4)] = 4.0;
        let mut flags = vec![false; d.len()];
        flags[d.index(2, 2, 2)] = true;
        flags[d.index(0, 0, 0)] = true;
        flags[d.index(4, 4, 4)] = true;
        let grid = grid_from(d, values);
        let mask = RoiMask::new(d, flags).unwrap();
        let q = quantize_roi(&grid, &mask, 5).unwrap();
        // level of the center voxel: (3-0)/4*5 = 3.75 -> 3
        let m = window_cooc(&q, (2, 2, 2)).unwrap();
        assert_eq!(m.at(3, 3), 1.0);
        assert_eq!(m.p.iter().filter(|&&p| p != 0.0).count(), 1);
    }

    #[test]
    fn two_voxel_pair_splits_mass() {
        let d = Dims::new(2, 1, 1).unwrap();
        let grid = grid_from(d, vec![0.0, 1.0]);
        let q = quantize_roi(&grid, &full_mask(d), 2).unwrap();
        let m = window_cooc(&q, (0, 0, 0)).unwrap();
        assert_eq!(m.at(0, 1), 0.5);
        assert_eq!(m.at(1, 0), 0.5);
        assert_eq!(m.at(0, 0), 0.0);
        assert_eq!(m.at(1, 1), 0.0);
    }

    #[test]
    fn center_outside_roi_is_an_error() {
        let d = Dims::new(2, 1, 1).unwrap();
        let grid = grid_from(d, vec![0.0, 1.0]);
        let mask = RoiMask::new(d, vec![true, false]).unwrap();
        let q = quantize_roi(&grid, &mask, 2).unwrap();
        assert!(matches!(window_cooc(&q, (1, 0, 0)), Err(Error::OutsideRoi)));
    }

    #[test]
    fn haralick_degenerate_single_cell() {
        let b = 6;
        let a = 4usize;
        let mut p = vec![0.0; b * b];
        p[a * b + a] = 1.0;
        let f = haralick13(&CoocMatrix { b, p });
        assert_eq!(f[0], 1.0); // energy
        assert_eq!(f[1], 0.0); // entropy
        assert_eq!(f[2], 0.0); // contrast
        assert_eq!(f[3], 0.0); // correlation (0/0 case)
        assert_eq!(f[4], 1.0); // homogeneity
        assert_eq!(f[5], 2.0 * a as f64); // sum average
        assert_eq!(f[6], 0.0); // sum variance
        assert_eq!(f[7], 0.0); // sum entropy
        assert_eq!(f[8], 0.0); // difference entropy
        assert_eq!(f[9], 0.0); // difference average
        assert_eq!(f[10], 0.0); // difference variance
    }

    #[test]
    fn haralick_two_cell_closed_forms() {
        let b = 2;
        let mut p = vec![0.0; 4];
        p[1] = 0.5; // (0,1)
        p[2] = 0.5; // (1,0)
        let f = haralick13(&CoocMatrix { b, p });
        assert!((f[0] - 0.5).abs() < 1e-12, "energy");
        assert!((f[1] - 1.0).abs() < 1e-12, "entropy (bits)");
        assert!((f[2] - 1.0).abs() < 1e-12, "contrast");
        assert!((f[3] - (-1.0)).abs() < 1e-12, "correlation");
        assert!((f[4] - 0.5).abs() < 1e-12, "homogeneity");
    }

    #[test]
    fn constant_roi_maps_are_flat() {
        let d = Dims::new(6, 6, 6).unwrap();
        let grid = grid_from(d, vec![3.3; d.len()]);
        let maps = extract_feature_maps(&grid, &full_mask(d), 16).unwrap();
        let by_name = |n: &str| {
            maps.iter().find(|m| m.feature.name() == n).unwrap()
        };
        assert!(by_name("energy").values.iter().all(|&v| v == 1.0));
        assert!(by_name("entropy").values.iter().all(|&v| v == 0.0));
        assert!(by_name("contrast").values.iter().all(|&v| v == 0.0));
        assert!(by_name("homogeneity").values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn two_block_contrast_peaks_on_interface() {
        let d = Dims::new(8, 4, 4).unwrap();
        let mut values = vec![0.0; d.len()];
        for z in 0..4 {
            for y in 0..4 {
                for x in 4..8 {
                    values[d.index(x, y, z)] = 1.0;
                }
            }
        }
        let grid = grid_from(d, values);
        let maps = extract_feature_maps(&grid, &full_mask(d), 2).unwrap();
        let contrast = maps.iter().find(|m| m.feature == FeatureId::Contrast).unwrap();
        let roi = &contrast.roi;
        let value_at = |x: usize, y: usize, z: usize| {
            let pos = roi.pos_of(d.index(x, y, z)).unwrap();
            contrast.values[pos]
        };
        // deep inside each block the window is constant
        assert_eq!(value_at(1, 2, 2), 0.0);
        assert_eq!(value_at(6, 2, 2), 0.0);
        // windows straddling x=3/4 see mixed levels
        assert!(value_at(4, 2, 2) > 0.0);
        assert!(value_at(3, 2, 2) > 0.0);
    }

    #[test]
    fn extraction_is_thread_count_invariant() {
        let d = Dims::new(7, 6, 5).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..d.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let grid = grid_from(d, values);
        let mask = full_mask(d);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| extract_feature_maps(&grid, &mask, 16).unwrap());
        let b = four.install(|| extract_feature_maps(&grid, &mask, 16).unwrap());
        for (ma, mb) in a.iter().zip(&b) {
            assert_eq!(ma.feature, mb.feature);
            for (x, y) in ma.values.iter().zip(&mb.values) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn reflection_is_equivariant() {
        use rand::{Rng, SeedableRng};
        let d = Dims::new(6, 5, 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let values: Vec<f64> = (0..d.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let grid = grid_from(d, values.clone());
        let mask = full_mask(d);
        // reflect along x
        let mut rvalues = vec![0.0; d.len()];
        for z in 0..d.nz {
            for y in 0..d.ny {
                for x in 0..d.nx {
                    rvalues[d.index(d.nx - 1 - x, y, z)] = values[d.index(x, y, z)];
                }
            }
        }
        let rgrid = grid_from(d, rvalues);
        let maps = extract_feature_maps(&grid, &mask, 8).unwrap();
        let rmaps = extract_feature_maps(&rgrid, &mask, 8).unwrap();
        for (m, rm) in maps.iter().zip(&rmaps) {
            for z in 0..d.nz {
                for y in 0..d.ny {
                    for x in 0..d.nx {
                        let a = m.values[m.roi.pos_of(d.index(x, y, z)).unwrap()];
                        let b = rm.values[rm.roi.pos_of(d.index(d.nx - 1 - x, y, z)).unwrap()];
                        assert_eq!(a.to_bits(), b.to_bits(), "feature {:?} at ({x},{y},{z})", m.feature);
                    }
                }
            }
        }
    }

    #[test]
    fn affine_rescale_leaves_maps_unchanged() {
        use rand::{Rng, SeedableRng};
        let d = Dims::new(5, 5, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        // integer-valued so the affine transform is exact in floating point
        let values: Vec<f64> = (0..d.len()).map(|_| rng.random_range(0..40) as f64).collect();
        let grid = grid_from(d, values.clone());
        let mask = full_mask(d);
        let base = extract_feature_maps(&grid, &mask, 16).unwrap();
        for (a, b) in [(2.0, 5.0), (0.5, -3.0), (4.0, 0.0)] {
            let tvalues: Vec<f64> = values.iter().map(|&v| a * v + b).collect();
            let tgrid = grid_from(d, tvalues);
            let tmaps = extract_feature_maps(&tgrid, &mask, 16).unwrap();
            for (m, tm) in base.iter().zip(&tmaps) {
                for (x, y) in m.values.iter().zip(&tm.values) {
                    assert_eq!(x.to_bits(), y.to_bits(), "feature {:?} a={a} b={b}", m.feature);
                }
            }
        }
    }

    #[test]
    fn feature_ranges_hold_on_random_input() {
        use rand::{Rng, SeedableRng};
        let d = Dims::new(6, 6, 6).unwrap();
        let bins = 8usize;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..d.len()).map(|_| rng.random_range(-2.0..9.0)).collect();
        let grid = grid_from(d, values);
        let maps = extract_feature_maps(&grid, &full_mask(d), bins).unwrap();
        let get = |f: FeatureId| maps.iter().find(|m| m.feature == f).unwrap();
        for &v in &get(FeatureId::Energy).values {
            assert!(v > 0.0 && v <= 1.0);
        }
        let hmax = 2.0 * (bins as f64).log2();
        for &v in &get(FeatureId::Entropy).values {
            assert!(v >= 0.0 && v <= hmax + 1e-12);
        }
        for &v in &get(FeatureId::Homogeneity).values {
            assert!(v > 0.0 && v <= 1.0 + 1e-12);
        }
        let cmax = ((bins - 1) * (bins - 1)) as f64;
        for &v in &get(FeatureId::Contrast).values {
            assert!(v >= 0.0 && v <= cmax);
        }
        for &v in &get(FeatureId::Icm2).values {
            assert!(v >= 0.0 && v <= 1.0 + 1e-12);
        }
    }
}
