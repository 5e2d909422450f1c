use crate::commands::cluster::ClusterMeta;
use crate::commands::extract::ExtractMeta;
use crate::CommonOpts;
use clap::Args;
use grrail_core::{
    build_graph, graph_features, ClusterMap, EdgePolicy, Error, FeatureId, Result, RoiIndex,
    RunConfig, WeightPolicy, GRAPH_METRIC_NAMES,
};
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Args, Debug)]
pub struct GraphArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Directory produced by `extract`.
    #[arg(long)]
    pub extracted: PathBuf,
    /// Directory produced by `cluster`.
    #[arg(long)]
    pub clustered: PathBuf,
    /// Output directory: one subdirectory per subject.
    #[arg(long)]
    pub out: PathBuf,
    /// rag26 or complete.
    #[arg(long, value_parser = clap::builder::ValueParser::new(|s: &str| s.parse::<EdgePolicy>()))]
    pub edge_policy: Option<EdgePolicy>,
    /// emd or centroid.
    #[arg(long, value_parser = clap::builder::ValueParser::new(|s: &str| s.parse::<WeightPolicy>()))]
    pub weight: Option<WeightPolicy>,
    /// Histogram bins for EMD edge weights.
    #[arg(long)]
    pub hist_bins: Option<usize>,
}

/// The exported graph document: nodes, edges, adjacency, provenance, and
/// the 15 metrics.
#[derive(Debug, Serialize)]
struct GraphDoc {
    subject_id: String,
    feature: String,
    graph: grrail_core::ClusterGraph,
    metrics: std::collections::BTreeMap<String, f64>,
    cluster_seed: u64,
}

pub fn run(args: &GraphArgs, cfg: &RunConfig) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(p) = args.edge_policy {
        cfg.edge_policy = p;
    }
    if let Some(w) = args.weight {
        cfg.weight_policy = w;
    }
    if let Some(h) = args.hist_bins {
        cfg.hist_bins = h;
    }
    cfg.validate()?;
    let subjects = super::subject_dirs(&args.extracted)?;
    super::ensure_dir(&args.out)?;

    subjects
        .par_iter()
        .map(|(subject_id, dir)| -> Result<()> {
            let meta: ExtractMeta = super::read_json(&dir.join("meta.json"))?;
            let mask = grrail_core::load_mask(&dir.join("mask.rvh"))?;
            let roi = RoiIndex::build(&mask);
            let cluster_dir = args.clustered.join(subject_id);
            let out_dir = args.out.join(subject_id);
            super::ensure_dir(&out_dir)?;
            for &feature in FeatureId::ALL.iter() {
                let map = super::load_feature_map(dir, feature, &mask, &roi, meta.bins)?;
                let cm = load_cluster_map(&cluster_dir, feature, &roi, &map.values)?;
                let graph =
                    build_graph(&cm, &map.values, cfg.edge_policy, cfg.weight_policy, cfg.hist_bins)?;
                let q = graph_features(&graph);
                let metrics: std::collections::BTreeMap<String, f64> = GRAPH_METRIC_NAMES
                    .iter()
                    .zip(q.values.iter())
                    .map(|(&n, &v)| (n.to_string(), v))
                    .collect();
                let doc = GraphDoc {
                    subject_id: subject_id.clone(),
                    feature: feature.name().to_string(),
                    graph,
                    metrics,
                    cluster_seed: cm.seed,
                };
                super::write_json(&out_dir.join(format!("{}_graph.json", feature.name())), &doc)?;
            }
            Ok(())
        })
        .collect::<Result<()>>()?;

    println!(
        "built graphs for {} subjects ({:?} edges, {:?} weights)",
        subjects.len(),
        cfg.edge_policy,
        cfg.weight_policy
    );
    Ok(())
}

/// Rebuilds a ClusterMap from a label volume and its metadata. Cluster means
/// and member counts are recomputed from the map values; the metadata is
/// used for validation and the seed.
fn load_cluster_map(
    cluster_dir: &std::path::Path,
    feature: FeatureId,
    roi: &Arc<RoiIndex>,
    values: &[f64],
) -> Result<ClusterMap> {
    let meta: ClusterMeta =
        super::read_json(&cluster_dir.join(format!("{}_clusters.json", feature.name())))?;
    let labels_vol =
        grrail_core::load_volume(&cluster_dir.join(format!("{}_labels.rvh", feature.name())))?;
    if labels_vol.dims != roi.dims {
        return Err(Error::DimsMismatch {
            grid: labels_vol.dims.as_tuple(),
            mask: roi.dims.as_tuple(),
        });
    }
    let mut labels = Vec::with_capacity(roi.len());
    for &idx in &roi.linear {
        let l = labels_vol.values[idx];
        if l < 0.0 || l.fract() != 0.0 || l as usize >= meta.u {
            return Err(Error::Parse(format!(
                "label volume for {} holds {l} at ROI voxel {idx}, expected 0..{}",
                feature.name(),
                meta.u
            )));
        }
        labels.push(l as u32);
    }
    let mut member_counts = vec![0usize; meta.u];
    let mut sums = vec![0.0f64; meta.u];
    for (pos, &l) in labels.iter().enumerate() {
        member_counts[l as usize] += 1;
        sums[l as usize] += values[pos];
    }
    if member_counts.iter().any(|&c| c == 0) {
        return Err(Error::Parse(format!("empty cluster in stored labels for {}", feature.name())));
    }
    let cluster_means: Vec<f64> =
        sums.iter().zip(&member_counts).map(|(s, &c)| s / c as f64).collect();
    Ok(ClusterMap {
        dims: roi.dims,
        roi: Arc::clone(roi),
        labels,
        cluster_means,
        member_counts,
        selected_u: meta.u,
        bic_table: meta.bic_table,
        seed: meta.seed,
    })
}
