use crate::manifest::Manifest;
use crate::CommonOpts;
use clap::Args;
use grrail_core::{resample_isotropic, ResampleMode, Result, RunConfig};
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct ResampleArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Input cohort manifest CSV.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory (gets volumes, masks, and a new manifest).
    #[arg(long)]
    pub out: PathBuf,
    /// Target isotropic spacing in mm.
    #[arg(long)]
    pub target_mm: Option<f64>,
    /// Intensity interpolation: trilinear or nearest (masks always nearest).
    #[arg(long, value_parser = clap::builder::ValueParser::new(|s: &str| s.parse::<ResampleMode>()))]
    pub mode: Option<ResampleMode>,
}

pub fn run(args: &ResampleArgs, cfg: &RunConfig) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(t) = args.target_mm {
        cfg.target_mm = t;
    }
    if let Some(m) = args.mode {
        cfg.resample_mode = m;
    }
    cfg.validate()?;
    let manifest = Manifest::load(&args.manifest)?;
    super::ensure_dir(&args.out)?;

    let rows: Vec<(String, String, String, u8, grrail_core::Split)> = manifest
        .entries
        .par_iter()
        .map(|entry| -> Result<_> {
            let grid = grrail_core::load_volume(&entry.volume)?;
            let mask = grrail_core::load_mask(&entry.mask)?;
            let (rgrid, rmask) =
                resample_isotropic(&grid, &mask, cfg.target_mm, cfg.resample_mode)?;
            let vol_name = format!("{}_vol.rvh", entry.subject_id);
            let mask_name = format!("{}_mask.rvh", entry.subject_id);
            grrail_core::write_raw_volume(&rgrid, &args.out.join(&vol_name))?;
            grrail_core::write_raw_mask(&rmask, rgrid.spacing_mm, &args.out.join(&mask_name))?;
            Ok((entry.subject_id.clone(), vol_name, mask_name, entry.label, entry.split))
        })
        .collect::<Result<_>>()?;

    Manifest::write_relative(&args.out.join("manifest.csv"), &rows)?;
    println!("resampled {} subjects to {} mm isotropic", rows.len(), cfg.target_mm);
    Ok(())
}
