use crate::manifest::Manifest;
use crate::CommonOpts;
use clap::Args;
use grrail_core::{cross_validate, CohortTable, Result, RunConfig};
use std::io::Write;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Descriptor CSV produced by `descriptor`.
    #[arg(long)]
    pub features: PathBuf,
    /// Cohort manifest supplying labels and splits.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for report.json and report.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub target_k: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub trees: Option<usize>,
}

pub fn run(args: &ClassifyArgs, cfg: &RunConfig) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(k) = args.target_k {
        cfg.target_k = k;
    }
    if let Some(f) = args.folds {
        cfg.folds = f;
    }
    if let Some(t) = args.trees {
        cfg.trees = t;
    }
    cfg.validate()?;
    let manifest = Manifest::load(&args.manifest)?;
    let table = CohortTable::from_feature_csv(&args.features, &manifest.label_map())?;
    let report = cross_validate(&table, &cfg.eval_config())?;
    super::ensure_dir(&args.out)?;
    super::write_json(&args.out.join("report.json"), &report)?;

    // headline metrics as a one-row CSV for quick aggregation
    let mut out = std::io::BufWriter::new(std::fs::File::create(args.out.join("report.csv"))?);
    writeln!(out, "auc,cv_auc,cv_accuracy_mean,cv_accuracy_std,test_accuracy,n_selected")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        report.auc,
        report.cv_auc,
        report.cv_accuracy_mean,
        report.cv_accuracy_std,
        report.test_accuracy,
        report.selected_features.len()
    )?;
    drop(out);

    println!(
        "AUC {:.3} | CV accuracy {:.3} +/- {:.3} | test accuracy {:.3} | {} features",
        report.auc,
        report.cv_accuracy_mean,
        report.cv_accuracy_std,
        report.test_accuracy,
        report.selected_features.len()
    );
    Ok(())
}
