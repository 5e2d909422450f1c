use crate::commands::extract::ExtractMeta;
use crate::CommonOpts;
use clap::Args;
use grrail_core::{cluster_feature_map, hashing, FeatureId, Result, RoiIndex, RunConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Directory produced by `extract`.
    #[arg(long)]
    pub extracted: PathBuf,
    /// Output directory: one subdirectory per subject.
    #[arg(long)]
    pub out: PathBuf,
    /// Candidate cluster-count cap for BIC selection.
    #[arg(long)]
    pub u_max: Option<usize>,
}

/// Metadata written next to each label volume.
#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterMeta {
    pub feature: String,
    pub u: usize,
    /// Per-cluster mean feature value, ascending.
    pub g: Vec<f64>,
    pub member_counts: Vec<usize>,
    pub bic_table: Vec<(usize, f64)>,
    pub seed: u64,
    pub u_max: usize,
}

pub fn run(args: &ClusterArgs, cfg: &RunConfig) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(u) = args.u_max {
        cfg.u_max = u;
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
            let out_dir = args.out.join(subject_id);
            super::ensure_dir(&out_dir)?;
            // seeds line up with the batch descriptor path: per-subject seed
            // mixed with the map index
            let subject_seed = hashing::subject_seed(cfg.seed, subject_id);
            for (mi, &feature) in FeatureId::ALL.iter().enumerate() {
                let map = super::load_feature_map(dir, feature, &mask, &roi, meta.bins)?;
                let cm = cluster_feature_map(&map, cfg.u_max, hashing::mix64(subject_seed, mi as u64))?;
                let labels_dense = super::densify(
                    &cm.labels.iter().map(|&l| l as f64).collect::<Vec<_>>(),
                    &roi,
                    -1.0,
                );
                let vol = grrail_core::VoxelGrid::new(cm.dims, [1.0; 3], labels_dense)?;
                grrail_core::write_raw_volume(&vol, &out_dir.join(format!("{}_labels.rvh", feature.name())))?;
                let meta_out = ClusterMeta {
                    feature: feature.name().to_string(),
                    u: cm.selected_u,
                    g: cm.cluster_means.clone(),
                    member_counts: cm.member_counts.clone(),
                    bic_table: cm.bic_table.clone(),
                    seed: cm.seed,
                    u_max: cfg.u_max,
                };
                super::write_json(&out_dir.join(format!("{}_clusters.json", feature.name())), &meta_out)?;
            }
            Ok(())
        })
        .collect::<Result<()>>()?;

    println!("clustered {} subjects (u_max = {})", subjects.len(), cfg.u_max);
    Ok(())
}
