//! Weighted region-adjacency graphs over cluster centroids.
//!
//! Nodes carry the centroid (continuous voxel coordinates), member count,
//! mean value, and a normalized value histogram over a shared bin grid.
//! Edges exist between 26-connected clusters (`Rag26`) or all pairs
//! (`Complete`); weights default to the closed-form 1-D earth mover's
//! distance between the two clusters' histograms, with plain centroid
//! Euclidean distance available as a fallback policy.

use crate::clustering::ClusterMap;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgePolicy {
    Rag26,
    Complete,
}

impl std::str::FromStr for EdgePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rag26" => Ok(EdgePolicy::Rag26),
            "complete" => Ok(EdgePolicy::Complete),
            other => Err(Error::InvalidParam(format!("unknown edge policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightPolicy {
    /// 1-D EMD between cluster value histograms.
    Emd,
    /// Euclidean distance between centroids, in voxel units.
    Centroid,
}

impl std::str::FromStr for WeightPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "emd" => Ok(WeightPolicy::Emd),
            "centroid" => Ok(WeightPolicy::Centroid),
            other => Err(Error::InvalidParam(format!("unknown weight policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphNode {
    pub cluster: usize,
    /// Mean of member voxel coordinates, not snapped to a voxel.
    pub centroid: [f64; 3],
    pub member_count: usize,
    pub mean_value: f64,
    pub histogram: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterGraph {
    pub nodes: Vec<GraphNode>,
    /// Undirected edges with `a < b`, ascending.
    pub edges: Vec<GraphEdge>,
    /// Dense row-major |V| x |V| adjacency, entries 0/1.
    pub adjacency: Vec<u8>,
    pub edge_policy: EdgePolicy,
    pub weight_policy: WeightPolicy,
    pub hist_bins: usize,
    pub hist_bin_width: f64,
}

impl ClusterGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.nodes.len() + j] != 0
    }
}

/// Per-cluster centroids in continuous voxel coordinates.
pub fn centroids(cm: &ClusterMap) -> Vec<[f64; 3]> {
    let mut sums = vec![[0.0f64; 3]; cm.selected_u];
    let d = cm.dims;
    for (pos, &idx) in cm.roi.linear.iter().enumerate() {
        let (x, y, z) = d.coords(idx);
        let s = &mut sums[cm.labels[pos] as usize];
        s[0] += x as f64;
        s[1] += y as f64;
        s[2] += z as f64;
    }
    sums.iter()
        .zip(&cm.member_counts)
        .map(|(s, &c)| [s[0] / c as f64, s[1] / c as f64, s[2] / c as f64])
        .collect()
}

/// Normalized histogram of one cluster's underlying values over `bins`
/// equal-width bins spanning the whole ROI value range (shared across
/// clusters so edge weights are comparable).
pub fn cluster_histogram(cm: &ClusterMap, values: &[f64], cluster: usize, bins: usize) -> Result<Vec<f64>> {
    if cluster >= cm.selected_u {
        return Err(Error::InvalidParam(format!("cluster {cluster} out of range")));
    }
    if bins < 1 {
        return Err(Error::InvalidParam("histogram bins must be >= 1".into()));
    }
    let (lo, width) = histogram_grid(values, bins);
    let mut h = vec![0.0f64; bins];
    let mut count = 0usize;
    for (pos, &l) in cm.labels.iter().enumerate() {
        if l as usize == cluster {
            h[bin_of(values[pos], lo, width, bins)] += 1.0;
            count += 1;
        }
    }
    for v in h.iter_mut() {
        *v /= count as f64;
    }
    Ok(h)
}

fn histogram_grid(values: &[f64], bins: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, (hi - lo) / bins as f64)
}

#[inline]
fn bin_of(v: f64, lo: f64, width: f64, bins: usize) -> usize {
    if width > 0.0 {
        (((v - lo) / width).floor() as usize).min(bins - 1)
    } else {
        0
    }
}

/// Closed-form 1-D optimal transport cost between two normalized histograms
/// on the same bin grid: `bin_width * sum_k |CDF1(k) - CDF2(k)|`.
pub fn emd_1d(h1: &[f64], h2: &[f64], bin_width: f64) -> Result<f64> {
    if h1.len() != h2.len() {
        return Err(Error::BinCountMismatch { left: h1.len(), right: h2.len() });
    }
    let mut c1 = 0.0;
    let mut c2 = 0.0;
    let mut total = 0.0;
    for (a, b) in h1.iter().zip(h2) {
        c1 += a;
        c2 += b;
        total += (c1 - c2).abs();
    }
    Ok(bin_width * total)
}

/// Builds the cluster graph for one map: one node per cluster, edges per
/// `edge_policy`, weights per `weight_policy`.
pub fn build_graph(
    cm: &ClusterMap,
    values: &[f64],
    edge_policy: EdgePolicy,
    weight_policy: WeightPolicy,
    hist_bins: usize,
) -> Result<ClusterGraph> {
    if values.len() != cm.labels.len() {
        return Err(Error::InvalidParam(format!(
            "value vector length {} does not match cluster map ROI size {}",
            values.len(),
            cm.labels.len()
        )));
    }
    let n = cm.selected_u;
    let cents = centroids(cm);
    let (_, width) = histogram_grid(values, hist_bins);
    let hists: Vec<Vec<f64>> =
        (0..n).map(|u| cluster_histogram(cm, values, u, hist_bins)).collect::<Result<_>>()?;

    let nodes: Vec<GraphNode> = (0..n)
        .map(|u| GraphNode {
            cluster: u,
            centroid: cents[u],
            member_count: cm.member_counts[u],
            mean_value: cm.cluster_means[u],
            histogram: hists[u].clone(),
        })
        .collect();

    let mut adjacent = vec![false; n * n];
    match edge_policy {
        EdgePolicy::Complete => {
            for i in 0..n {
                for j in 0..n {
                    adjacent[i * n + j] = i != j;
                }
            }
        }
        EdgePolicy::Rag26 => {
            let d = cm.dims;
            for (pos, &idx) in cm.roi.linear.iter().enumerate() {
                let (x, y, z) = d.coords(idx);
                let la = cm.labels[pos] as usize;
                for &(dx, dy, dz) in &crate::glcm::OFFSETS_13 {
                    let (nx, ny, nz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                    if nx < 0
                        || ny < 0
                        || nz < 0
                        || nx >= d.nx as i64
                        || ny >= d.ny as i64
                        || nz >= d.nz as i64
                    {
                        continue;
                    }
                    let nidx = d.index(nx as usize, ny as usize, nz as usize);
                    if let Some(npos) = cm.roi.pos_of(nidx) {
                        let lb = cm.labels[npos] as usize;
                        if la != lb {
                            adjacent[la * n + lb] = true;
                            adjacent[lb * n + la] = true;
                        }
                    }
                }
            }
        }
    }

    let mut edges = Vec::new();
    let mut adjacency = vec![0u8; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent[i * n + j] {
                let weight = match weight_policy {
                    WeightPolicy::Emd => emd_1d(&hists[i], &hists[j], width)?,
                    WeightPolicy::Centroid => {
                        let a = cents[i];
                        let b = cents[j];
                        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2))
                            .sqrt()
                    }
                };
                edges.push(GraphEdge { a: i, b: j, weight });
                adjacency[i * n + j] = 1;
                adjacency[j * n + i] = 1;
            }
        }
    }

    Ok(ClusterGraph {
        nodes,
        edges,
        adjacency,
        edge_policy,
        weight_policy,
        hist_bins,
        hist_bin_width: width,
    })
}
