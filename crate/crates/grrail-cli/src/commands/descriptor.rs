use crate::manifest::Manifest;
use crate::CommonOpts;
use clap::Args;
use grrail_core::{
    grrail, grrail_feature_names, hashing, intensity_feature_names, intensity_graph,
    radiomics_aggregate, radiomics_feature_names, CohortRow, CohortTable, DescriptorKind, Result,
    RunConfig,
};
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct DescriptorArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Input cohort manifest CSV.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for descriptor CSVs and the run manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Descriptor kind(s) to emit; repeatable. Default: grrail.
    #[arg(long = "kind", value_parser = clap::builder::ValueParser::new(|s: &str| s.parse::<DescriptorKind>()))]
    pub kinds: Vec<DescriptorKind>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub u_max: Option<usize>,
}

#[derive(Debug, Serialize)]
struct SubjectRecord {
    subject_id: String,
    label: u8,
    split: grrail_core::Split,
    seed: u64,
    volume_hash: String,
    mask_hash: String,
}

#[derive(Debug, Serialize)]
struct RunManifest {
    config: RunConfig,
    kinds: Vec<DescriptorKind>,
    master_seed: u64,
    subjects: Vec<SubjectRecord>,
    outputs: std::collections::BTreeMap<String, String>,
}

pub fn run(args: &DescriptorArgs, cfg: &RunConfig) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(b) = args.bins {
        cfg.bins = b;
    }
    if let Some(u) = args.u_max {
        cfg.u_max = u;
    }
    if !args.kinds.is_empty() {
        cfg.kinds = args.kinds.clone();
    }
    cfg.validate()?;
    let manifest = Manifest::load(&args.manifest)?;
    super::ensure_dir(&args.out)?;

    struct PerSubject {
        record: SubjectRecord,
        grrail: Option<Vec<f64>>,
        radiomics: Option<Vec<f64>>,
        intensity: Option<Vec<f64>>,
    }

    let want = |kind: DescriptorKind| cfg.kinds.contains(&kind);
    let results: Vec<PerSubject> = manifest
        .entries
        .par_iter()
        .map(|entry| -> Result<PerSubject> {
            let grid = grrail_core::load_volume(&entry.volume)?;
            let mask = grrail_core::load_mask(&entry.mask)?;
            let seed = hashing::subject_seed(cfg.seed, &entry.subject_id);
            let mut dcfg = cfg.descriptor_config();
            dcfg.seed = seed;
            let g = want(DescriptorKind::Grrail)
                .then(|| grrail(&grid, &mask, &dcfg).map(|d| d.values))
                .transpose()?;
            let r = want(DescriptorKind::Radiomics)
                .then(|| radiomics_aggregate(&grid, &mask, &dcfg).map(|d| d.values))
                .transpose()?;
            let i = want(DescriptorKind::Intensity)
                .then(|| intensity_graph(&grid, &mask, &dcfg).map(|d| d.values))
                .transpose()?;
            Ok(PerSubject {
                record: SubjectRecord {
                    subject_id: entry.subject_id.clone(),
                    label: entry.label,
                    split: entry.split,
                    seed,
                    volume_hash: hashing::hex64(hashing::fnv1a64(&std::fs::read(&entry.volume)?)),
                    mask_hash: hashing::hex64(hashing::fnv1a64(&std::fs::read(&entry.mask)?)),
                },
                grrail: g,
                radiomics: r,
                intensity: i,
            })
        })
        .collect::<Result<_>>()?;

    let mut outputs = std::collections::BTreeMap::new();
    for kind in &cfg.kinds {
        let (names, pick): (Vec<String>, Box<dyn Fn(&PerSubject) -> &Vec<f64>>) = match kind {
            DescriptorKind::Grrail => (grrail_feature_names(), Box::new(|s| s.grrail.as_ref().unwrap())),
            DescriptorKind::Radiomics => {
                (radiomics_feature_names(), Box::new(|s| s.radiomics.as_ref().unwrap()))
            }
            DescriptorKind::Intensity => {
                (intensity_feature_names(), Box::new(|s| s.intensity.as_ref().unwrap()))
            }
        };
        let rows: Vec<CohortRow> = results
            .iter()
            .map(|s| CohortRow {
                id: s.record.subject_id.clone(),
                features: pick(s).clone(),
                label: s.record.label,
                split: s.record.split,
            })
            .collect();
        let table = CohortTable::new(names, rows)?;
        let file = format!("{}.csv", kind.name());
        table.write_feature_csv(&args.out.join(&file))?;
        outputs.insert(kind.name().to_string(), file);
    }

    let run_manifest = RunManifest {
        master_seed: cfg.seed,
        kinds: cfg.kinds.clone(),
        config: cfg,
        subjects: results.into_iter().map(|s| s.record).collect(),
        outputs,
    };
    super::write_json(&args.out.join("run_manifest.json"), &run_manifest)?;
    println!("wrote descriptors for {} subjects to {}", manifest.entries.len(), args.out.display());
    Ok(())
}
