use crate::manifest::Manifest;
use crate::CommonOpts;
use clap::Args;
use grrail_core::{cohort_spec, generate_phantom, PhantomClass, Result, RunConfig, Split};
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct PhantomArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Subjects per class (the cohort holds 2n volumes).
    #[arg(long)]
    pub n: usize,
    /// Output directory for volumes, masks, and manifest.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Grid edge length in voxels.
    #[arg(long, default_value_t = 48)]
    pub size: usize,
    /// Fraction of each class assigned to the train split.
    #[arg(long, default_value_t = 0.75)]
    pub train_frac: f64,
}

pub fn run(args: &PhantomArgs, cfg: &RunConfig) -> Result<()> {
    if args.n == 0 {
        return Err(grrail_core::Error::InvalidParam("need at least one subject per class".into()));
    }
    if !(0.0..1.0).contains(&args.train_frac) && args.train_frac != 1.0 {
        return Err(grrail_core::Error::InvalidParam("train_frac must lie in (0, 1]".into()));
    }
    super::ensure_dir(&args.out)?;
    let n_train = ((args.n as f64) * args.train_frac).round() as usize;

    let subjects: Vec<(usize, PhantomClass)> = (0..args.n)
        .flat_map(|i| [(i, PhantomClass::Homogeneous), (i, PhantomClass::Heterogeneous)])
        .collect();

    let rows: Vec<(String, String, String, u8, Split)> = subjects
        .par_iter()
        .map(|&(i, class)| -> Result<_> {
            let spec = cohort_spec(class, i, args.size, cfg.seed);
            let (grid, mask, _) = generate_phantom(&spec)?;
            let label = u8::from(class == PhantomClass::Heterogeneous);
            let id = format!("{}{i:03}", if label == 1 { "het" } else { "hom" });
            let vol_name = format!("{id}_vol.rvh");
            let mask_name = format!("{id}_mask.rvh");
            grrail_core::write_raw_volume(&grid, &args.out.join(&vol_name))?;
            grrail_core::write_raw_mask(&mask, grid.spacing_mm, &args.out.join(&mask_name))?;
            let split = if i < n_train { Split::Train } else { Split::Test };
            Ok((id, vol_name, mask_name, label, split))
        })
        .collect::<Result<_>>()?;

    let mut rows = rows;
    rows.sort();
    Manifest::write_relative(&args.out.join("manifest.csv"), &rows)?;
    println!(
        "generated {} phantoms ({} per class, {}^3 grids, seed {})",
        rows.len(),
        args.n,
        args.size,
        cfg.seed
    );
    Ok(())
}
