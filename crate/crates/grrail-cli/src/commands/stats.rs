use crate::manifest::Manifest;
use clap::{Args, Subcommand};
use grrail_core::{mann_whitney_u, two_proportion_z, CohortTable, Result};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Subcommand, Debug)]
pub enum StatsCommand {
    /// Mann-Whitney U test per feature, class 1 vs class 0.
    Mwu(MwuArgs),
    /// Pooled two-proportion z-test between two accuracies.
    Ztest(ZtestArgs),
}

#[derive(Args, Debug)]
pub struct MwuArgs {
    /// Descriptor CSV produced by `descriptor`.
    #[arg(long)]
    pub features: PathBuf,
    /// Cohort manifest supplying labels.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Restrict to specific feature names; repeatable. Default: all.
    #[arg(long = "feature")]
    pub only: Vec<String>,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ZtestArgs {
    #[arg(long)]
    pub acc1: f64,
    #[arg(long)]
    pub n1: usize,
    #[arg(long)]
    pub acc2: f64,
    #[arg(long)]
    pub n2: usize,
}

#[derive(Debug, Serialize)]
struct MwuRow {
    feature: String,
    u: f64,
    p_value: f64,
}

pub fn run(cmd: &StatsCommand) -> Result<()> {
    match cmd {
        StatsCommand::Mwu(args) => {
            let manifest = Manifest::load(&args.manifest)?;
            let table = CohortTable::from_feature_csv(&args.features, &manifest.label_map())?;
            let mut rows = Vec::new();
            for (j, name) in table.feature_names.iter().enumerate() {
                if !args.only.is_empty() && !args.only.contains(name) {
                    continue;
                }
                let pos: Vec<f64> = table
                    .rows
                    .iter()
                    .filter(|r| r.label == 1)
                    .map(|r| r.features[j])
                    .collect();
                let neg: Vec<f64> = table
                    .rows
                    .iter()
                    .filter(|r| r.label == 0)
                    .map(|r| r.features[j])
                    .collect();
                let (u, p_value) = mann_whitney_u(&pos, &neg)?;
                rows.push(MwuRow { feature: name.clone(), u, p_value });
            }
            rows.sort_by(|a, b| {
                a.p_value.partial_cmp(&b.p_value).unwrap().then(a.feature.cmp(&b.feature))
            });
            match &args.out {
                Some(path) => crate::commands::write_json(path, &rows)?,
                None => println!("{}", serde_json::to_string_pretty(&rows).unwrap()),
            }
            Ok(())
        }
        StatsCommand::Ztest(args) => {
            let r = two_proportion_z(args.acc1, args.n1, args.acc2, args.n2)?;
            println!("{}", serde_json::to_string_pretty(&r).unwrap());
            Ok(())
        }
    }
}
