//! Per-subject descriptors: the 195-dim graph-radiomic vector, the 65-dim
//! aggregate-statistics baseline, and the 15-dim intensity-graph variant.
//!
//! Feature map order is fixed (`FeatureId::ALL`), metric order is fixed
//! (`GRAPH_METRIC_NAMES`), and the concatenation is map-major, so names are
//! a stable API. Zero-variance statistics are defined as 0 so downstream
//! selection never sees non-finite values.

use crate::clustering::{cluster_feature_map, cluster_roi_values};
use crate::error::{Error, Result};
use crate::glcm::{extract_feature_maps, FeatureId};
use crate::graph::{build_graph, ClusterGraph, EdgePolicy, WeightPolicy};
use crate::hashing::{fnv1a64, hex64, mix64};
use crate::metrics::{graph_features, GRAPH_METRIC_NAMES};
use crate::volume::{validate_pair, RoiIndex, RoiMask, VoxelGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Everything the descriptor stage needs to know; a subset of the full run
/// configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DescriptorConfig {
    pub bins: usize,
    pub u_max: usize,
    /// Cluster cap for the intensity-graph variant.
    pub intensity_u_max: usize,
    pub hist_bins: usize,
    pub edge_policy: EdgePolicy,
    pub weight_policy: WeightPolicy,
    pub seed: u64,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        DescriptorConfig {
            bins: 16,
            u_max: 5,
            intensity_u_max: 5,
            hist_bins: 32,
            edge_policy: EdgePolicy::Rag26,
            weight_policy: WeightPolicy::Emd,
            seed: 0,
        }
    }
}

/// Provenance recorded next to every emitted descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub bins: usize,
    pub u_max: usize,
    pub hist_bins: usize,
    pub edge_policy: EdgePolicy,
    pub weight_policy: WeightPolicy,
    pub seed: u64,
    /// FNV-1a of the source volume payload (dims, spacing, values, flags).
    pub source_hash: String,
}

#[derive(Debug, Clone)]
pub struct GrRAiLDescriptor {
    pub values: Vec<f64>,
    pub names: Vec<String>,
    pub provenance: Provenance,
    /// The 13 per-map graphs, in map order, for export and plotting.
    pub graphs: Vec<ClusterGraph>,
}

#[derive(Debug, Clone)]
pub struct RadiomicsDescriptor {
    pub values: Vec<f64>,
    pub names: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct IntensityGraphDescriptor {
    pub values: Vec<f64>,
    pub names: Vec<String>,
    pub provenance: Provenance,
    pub graph: ClusterGraph,
}

pub const RADIOMIC_STATS: [&str; 5] = ["mean", "median", "std", "kurtosis", "skewness"];

/// The 195 canonical `<map>_<metric>` names, map-major.
pub fn grrail_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(13 * 15);
    for feature in FeatureId::ALL {
        for metric in GRAPH_METRIC_NAMES {
            names.push(format!("{}_{}", feature.name(), metric));
        }
    }
    names
}

/// The 65 canonical `<map>_<stat>` names, map-major.
pub fn radiomics_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(13 * 5);
    for feature in FeatureId::ALL {
        for stat in RADIOMIC_STATS {
            names.push(format!("{}_{}", feature.name(), stat));
        }
    }
    names
}

/// The 15 canonical `intensity_<metric>` names.
pub fn intensity_feature_names() -> Vec<String> {
    GRAPH_METRIC_NAMES.iter().map(|m| format!("intensity_{m}")).collect()
}

fn provenance(grid: &VoxelGrid, mask: &RoiMask, cfg: &DescriptorConfig) -> Provenance {
    let mut bytes = Vec::with_capacity(grid.values.len() * 8 + mask.flags.len() + 48);
    for d in [grid.dims.nx, grid.dims.ny, grid.dims.nz] {
        bytes.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for s in grid.spacing_mm {
        bytes.extend_from_slice(&s.to_le_bytes());
    }
    for v in &grid.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend(mask.flags.iter().map(|&f| u8::from(f)));
    Provenance {
        bins: cfg.bins,
        u_max: cfg.u_max,
        hist_bins: cfg.hist_bins,
        edge_policy: cfg.edge_policy,
        weight_policy: cfg.weight_policy,
        seed: cfg.seed,
        source_hash: hex64(fnv1a64(&bytes)),
    }
}

/// Full graph-radiomic pipeline for one subject: 13 texture maps, per-map
/// clustering, per-map graphs, 15 metrics each, concatenated map-major.
pub fn grrail(grid: &VoxelGrid, mask: &RoiMask, cfg: &DescriptorConfig) -> Result<GrRAiLDescriptor> {
    let roi_count = validate_pair(grid, mask)?;
    if roi_count == 0 {
        return Err(Error::RoiTooSmall("windowed texture extraction needs a non-empty ROI".into()));
    }
    let maps = extract_feature_maps(grid, mask, cfg.bins)?;

    let per_map: Vec<(ClusterGraph, [f64; 15])> = maps
        .par_iter()
        .enumerate()
        .map(|(mi, map)| -> Result<(ClusterGraph, [f64; 15])> {
            let cm = cluster_feature_map(map, cfg.u_max, mix64(cfg.seed, mi as u64))?;
            let graph = build_graph(&cm, &map.values, cfg.edge_policy, cfg.weight_policy, cfg.hist_bins)?;
            let q = graph_features(&graph);
            Ok((graph, q.values))
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(13 * 15);
    let mut graphs = Vec::with_capacity(13);
    for (graph, q) in per_map {
        values.extend_from_slice(&q);
        graphs.push(graph);
    }
    let names = grrail_feature_names();
    assert_eq!(values.len(), 195, "descriptor length contract");
    assert_eq!(names.len(), 195);
    Ok(GrRAiLDescriptor { values, names, provenance: provenance(grid, mask, cfg), graphs })
}

/// Five aggregate statistics of each map's ROI value distribution.
pub fn radiomics_aggregate(
    grid: &VoxelGrid,
    mask: &RoiMask,
    cfg: &DescriptorConfig,
) -> Result<RadiomicsDescriptor> {
    validate_pair(grid, mask)?;
    let maps = extract_feature_maps(grid, mask, cfg.bins)?;
    let mut values = Vec::with_capacity(13 * 5);
    for map in &maps {
        let s = aggregate_stats(&map.values);
        values.extend_from_slice(&s);
    }
    let names = radiomics_feature_names();
    assert_eq!(values.len(), 65, "descriptor length contract");
    Ok(RadiomicsDescriptor { values, names, provenance: provenance(grid, mask, cfg) })
}

/// mean, median, population std, excess kurtosis, Fisher skewness; the last
/// three are 0 at zero variance.
pub fn aggregate_stats(values: &[f64]) -> [f64; 5] {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let std = m2.sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    [mean, median, std, kurtosis, skewness]
}

/// Clusters the raw ROI intensities and reads the 15 graph metrics off the
/// resulting intensity-cluster graph.
pub fn intensity_graph(
    grid: &VoxelGrid,
    mask: &RoiMask,
    cfg: &DescriptorConfig,
) -> Result<IntensityGraphDescriptor> {
    validate_pair(grid, mask)?;
    let roi = RoiIndex::build(mask);
    let intensities: Vec<f64> = roi.linear.iter().map(|&i| grid.values[i]).collect();
    let cm = cluster_roi_values(&intensities, roi, grid.dims, cfg.intensity_u_max, mix64(cfg.seed, 0x1_0000))?;
    let graph = build_graph(&cm, &intensities, cfg.edge_policy, cfg.weight_policy, cfg.hist_bins)?;
    let q = graph_features(&graph);
    let names = intensity_feature_names();
    assert_eq!(q.values.len(), 15, "descriptor length contract");
    Ok(IntensityGraphDescriptor {
        values: q.values.to_vec(),
        names,
        provenance: provenance(grid, mask, cfg),
        graph,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::SINGLE_NODE_ROW;
    use crate::volume::Dims;

    fn ball(dim: usize, radius: f64) -> (VoxelGrid, RoiMask) {
        let d = Dims::new(dim, dim, dim).unwrap();
        let c = (dim - 1) as f64 / 2.0;
        let mut flags = vec![false; d.len()];
        for z in 0..dim {
            for y in 0..dim {
                for x in 0..dim {
                    let r2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2) + (z as f64 - c).powi(2);
                    flags[d.index(x, y, z)] = r2 <= radius * radius;
                }
            }
        }
        let grid = VoxelGrid::new(d, [1.0; 3], vec![1.0; d.len()]).unwrap();
        (grid, RoiMask::new(d, flags).unwrap())
    }

    #[test]
    fn names_are_unique_and_sized() {
        let g = grrail_feature_names();
        assert_eq!(g.len(), 195);
        let mut set: std::collections::HashSet<_> = g.iter().collect();
        assert_eq!(set.len(), 195);
        let r = radiomics_feature_names();
        assert_eq!(r.len(), 65);
        set = r.iter().collect();
        assert_eq!(set.len(), 65);
        let i = intensity_feature_names();
        assert_eq!(i.len(), 15);
        assert_eq!(g[15], "entropy_size");
        assert!(g.contains(&"entropy_avg_path_length".to_string()));
        assert!(g.contains(&"icm2_assortativity".to_string()));
        assert!(g.contains(&"homogeneity_small_worldness".to_string()));
    }

    #[test]
    fn constant_phantom_gives_single_node_rows() {
        let (grid, mask) = ball(12, 4.5);
        let d = grrail(&grid, &mask, &DescriptorConfig::default()).unwrap();
        assert_eq!(d.values.len(), 195);
        for block in 0..13 {
            assert_eq!(&d.values[block * 15..(block + 1) * 15], &SINGLE_NODE_ROW, "map {block}");
        }
        for g in &d.graphs {
            assert_eq!(g.node_count(), 1);
        }
    }

    #[test]
    fn constant_phantom_intensity_graph_is_single_node() {
        let (grid, mask) = ball(10, 3.5);
        let d = intensity_graph(&grid, &mask, &DescriptorConfig::default()).unwrap();
        assert_eq!(d.values.len(), 15);
        assert_eq!(d.values.as_slice(), &SINGLE_NODE_ROW);
    }

    #[test]
    fn two_intensity_blocks_give_one_edge_graph() {
        let d = Dims::new(12, 6, 6).unwrap();
        let mut values = vec![0.0; d.len()];
        for z in 0..6 {
            for y in 0..6 {
                for x in 6..12 {
                    values[d.index(x, y, z)] = 50.0;
                }
            }
        }
        let grid = VoxelGrid::new(d, [1.0; 3], values).unwrap();
        let mask = RoiMask::new(d, vec![true; d.len()]).unwrap();
        let desc = intensity_graph(&grid, &mask, &DescriptorConfig::default()).unwrap();
        assert_eq!(desc.graph.node_count(), 2);
        assert_eq!(desc.graph.edge_count(), 1);
        let q = |name: &str| {
            let i = GRAPH_METRIC_NAMES.iter().position(|&n| n == name).unwrap();
            desc.values[i]
        };
        assert_eq!(q("size"), 2.0);
        assert_eq!(q("density"), 1.0);
        assert_eq!(q("connected_components"), 1.0);
    }

    #[test]
    fn radiomics_degenerate_and_symmetric_stats() {
        let s = aggregate_stats(&[3.0; 20]);
        assert_eq!(s, [3.0, 3.0, 0.0, 0.0, 0.0]);
        let mut bimodal = vec![0.0; 10];
        bimodal.extend(vec![1.0; 10]);
        let s = aggregate_stats(&bimodal);
        assert_eq!(s[0], 0.5);
        assert_eq!(s[2], 0.5);
        assert_eq!(s[4], 0.0); // skewness of a symmetric distribution
    }

    #[test]
    fn radiomics_matches_streaming_moment_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let values: Vec<f64> = (0..4001).map(|_| rng.random_range(-4.0..9.0)).collect();
        let got = aggregate_stats(&values);
        // independent oracle: incremental central-moment updates
        let (mut n, mut mean, mut m2, mut m3, mut m4) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &x in &values {
            let n1 = n;
            n += 1.0;
            let delta = x - mean;
            let delta_n = delta / n;
            let delta_n2 = delta_n * delta_n;
            let term1 = delta * delta_n * n1;
            mean += delta_n;
            m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
            m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2;
            m2 += term1;
        }
        let var = m2 / n;
        let skew = (m3 / n) / var.powf(1.5);
        let kurt = (m4 / n) / (var * var) - 3.0;
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        assert!((got[0] - mean).abs() < 1e-10);
        assert!((got[1] - median).abs() < 1e-10);
        assert!((got[2] - var.sqrt()).abs() < 1e-10);
        assert!((got[3] - kurt).abs() < 1e-10);
        assert!((got[4] - skew).abs() < 1e-10);
    }

    #[test]
    fn radiomics_descriptor_is_65_long() {
        let (grid, mask) = ball(10, 3.5);
        let d = radiomics_aggregate(&grid, &mask, &DescriptorConfig::default()).unwrap();
        assert_eq!(d.values.len(), 65);
        assert!(d.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn grrail_is_deterministic_across_thread_counts() {
        use rand::{Rng, SeedableRng};
        let (grid0, mask) = ball(14, 5.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        let values: Vec<f64> = grid0.values.iter().map(|_| rng.random_range(0.0..10.0)).collect();
        let grid = VoxelGrid::new(grid0.dims, grid0.spacing_mm, values).unwrap();
        let cfg = DescriptorConfig { seed: 77, ..DescriptorConfig::default() };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| grrail(&grid, &mask, &cfg).unwrap());
        let b = four.install(|| grrail(&grid, &mask, &cfg).unwrap());
        assert_eq!(a.values.len(), b.values.len());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(a.provenance.source_hash, b.provenance.source_hash);
    }

    #[test]
    fn grrail_is_translation_invariant_end_to_end() {
        use rand::{Rng, SeedableRng};
        // same textured ellipsoid placed at two offsets inside a larger box
        let dim = 20usize;
        let d = Dims::new(dim, dim, dim).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(50);
        let sub = 9usize;
        let texture: Vec<f64> = (0..sub * sub * sub).map(|_| rng.random_range(0.0..100.0)).collect();
        let make = |off: usize| {
            let mut values = vec![0.0; d.len()];
            let mut flags = vec![false; d.len()];
            let c = (sub as f64 - 1.0) / 2.0;
            for z in 0..sub {
                for y in 0..sub {
                    for x in 0..sub {
                        let r2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2) + (z as f64 - c).powi(2);
                        if r2 <= c * c {
                            let idx = d.index(x + off, y + off, z + off);
                            values[idx] = texture[x + sub * (y + sub * z)];
                            flags[idx] = true;
                        }
                    }
                }
            }
            (
                VoxelGrid::new(d, [1.0; 3], values).unwrap(),
                RoiMask::new(d, flags).unwrap(),
            )
        };
        let (g0, m0) = make(1);
        let (g1, m1) = make(7);
        let cfg = DescriptorConfig { seed: 3, ..DescriptorConfig::default() };
        let a = grrail(&g0, &m0, &cfg).unwrap();
        let b = grrail(&g1, &m1, &cfg).unwrap();
        for (i, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
            assert_eq!(x.to_bits(), y.to_bits(), "feature {} differs", a.names[i]);
        }
    }
}
