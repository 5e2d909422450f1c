use crate::manifest::Manifest;
use crate::CommonOpts;
use clap::Args;
use grrail_core::{extract_feature_maps, hashing, FeatureId, Result, RunConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Input cohort manifest CSV.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory: one subdirectory per subject.
    #[arg(long)]
    pub out: PathBuf,
    /// Quantization bins for the co-occurrence matrices.
    #[arg(long)]
    pub bins: Option<usize>,
}

/// Sidecar metadata written next to each subject's 13 map volumes.
#[derive(Debug, Serialize, Deserialize)]
pub struct ExtractMeta {
    pub subject_id: String,
    pub bins: usize,
    pub window: usize,
    pub features: Vec<String>,
    pub source_hash: String,
    pub label: u8,
    pub split: grrail_core::Split,
}

pub fn run(args: &ExtractArgs, cfg: &RunConfig) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(b) = args.bins {
        cfg.bins = b;
    }
    cfg.validate()?;
    let manifest = Manifest::load(&args.manifest)?;
    super::ensure_dir(&args.out)?;

    manifest
        .entries
        .par_iter()
        .map(|entry| -> Result<()> {
            let grid = grrail_core::load_volume(&entry.volume)?;
            let mask = grrail_core::load_mask(&entry.mask)?;
            let maps = extract_feature_maps(&grid, &mask, cfg.bins)?;
            let dir = args.out.join(&entry.subject_id);
            super::ensure_dir(&dir)?;
            grrail_core::write_raw_mask(&mask, grid.spacing_mm, &dir.join("mask.rvh"))?;
            for map in &maps {
                let dense = super::densify(&map.values, &map.roi, 0.0);
                let vol = grrail_core::VoxelGrid::new(map.dims, grid.spacing_mm, dense)?;
                grrail_core::write_raw_volume(&vol, &dir.join(format!("{}.rvh", map.feature.name())))?;
            }
            let volume_bytes = std::fs::read(&entry.volume)?;
            let meta = ExtractMeta {
                subject_id: entry.subject_id.clone(),
                bins: cfg.bins,
                window: 3,
                features: FeatureId::ALL.iter().map(|f| f.name().to_string()).collect(),
                source_hash: hashing::hex64(hashing::fnv1a64(&volume_bytes)),
                label: entry.label,
                split: entry.split,
            };
            super::write_json(&dir.join("meta.json"), &meta)
        })
        .collect::<Result<()>>()?;

    println!("extracted 13 maps for {} subjects (bins = {})", manifest.entries.len(), cfg.bins);
    Ok(())
}
