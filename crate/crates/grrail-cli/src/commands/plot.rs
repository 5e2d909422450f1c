use crate::plotting::{render_graph, render_slice_heatmap};
use crate::CommonOpts;
use clap::Args;
use grrail_core::{Error, Result, RunConfig};
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Directory produced by `extract` (enables map heatmaps).
    #[arg(long)]
    pub extracted: Option<PathBuf>,
    /// Directory produced by `graph` (enables graph renderings).
    #[arg(long)]
    pub graphs: Option<PathBuf>,
    /// Output directory for PNG files.
    #[arg(long)]
    pub out: PathBuf,
    /// Feature maps to plot; repeatable. Default: entropy.
    #[arg(long = "feature", default_values_t = [String::from("entropy")])]
    pub features: Vec<String>,
    /// Upsampling factor for heatmaps.
    #[arg(long, default_value_t = 6)]
    pub scale: u32,
}

#[derive(serde::Deserialize)]
struct GraphDocIn {
    graph: grrail_core::ClusterGraph,
}

pub fn run(args: &PlotArgs, _cfg: &RunConfig) -> Result<()> {
    if args.extracted.is_none() && args.graphs.is_none() {
        return Err(Error::InvalidParam("pass --extracted and/or --graphs".into()));
    }
    super::ensure_dir(&args.out)?;
    let mut emitted = 0usize;

    if let Some(extracted) = &args.extracted {
        let subjects = super::subject_dirs(extracted)?;
        let count: usize = subjects
            .par_iter()
            .map(|(subject_id, dir)| -> Result<usize> {
                let mask = grrail_core::load_mask(&dir.join("mask.rvh"))?;
                let mut n = 0;
                for feature in &args.features {
                    let path = dir.join(format!("{feature}.rvh"));
                    if !path.exists() {
                        return Err(Error::InvalidParam(format!(
                            "no extracted map '{feature}' for subject {subject_id}"
                        )));
                    }
                    let map = grrail_core::load_volume(&path)?;
                    let img = render_slice_heatmap(&map, &mask, args.scale.max(1));
                    let out = args.out.join(format!("{subject_id}_{feature}_slice.png"));
                    img.save(&out).map_err(|e| Error::Parse(format!("png encode: {e}")))?;
                    n += 1;
                }
                Ok(n)
            })
            .collect::<Result<Vec<usize>>>()?
            .into_iter()
            .sum();
        emitted += count;
    }

    if let Some(graphs) = &args.graphs {
        let subjects = super::subject_dirs(graphs)?;
        let count: usize = subjects
            .par_iter()
            .map(|(subject_id, dir)| -> Result<usize> {
                let mut n = 0;
                for feature in &args.features {
                    let path = dir.join(format!("{feature}_graph.json"));
                    if !path.exists() {
                        return Err(Error::InvalidParam(format!(
                            "no graph for map '{feature}' of subject {subject_id}"
                        )));
                    }
                    let doc: GraphDocIn = super::read_json(&path)?;
                    let img = render_graph(&doc.graph, 600);
                    let out = args.out.join(format!("{subject_id}_{feature}_graph.png"));
                    img.save(&out).map_err(|e| Error::Parse(format!("png encode: {e}")))?;
                    n += 1;
                }
                Ok(n)
            })
            .collect::<Result<Vec<usize>>>()?
            .into_iter()
            .sum();
        emitted += count;
    }

    println!("wrote {emitted} plots to {}", args.out.display());
    Ok(())
}
