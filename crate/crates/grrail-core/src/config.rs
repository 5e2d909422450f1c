//! Run configuration: defaults, key=value file parsing, and validation
//! against the preconditions of the stages that consume each field.

use crate::descriptor::DescriptorConfig;
use crate::error::{Error, Result};
use crate::graph::{EdgePolicy, WeightPolicy};
use crate::ml::{EvalConfig, FeaturesPerSplit, ForestParams};
use crate::volume::ResampleMode;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    Grrail,
    Radiomics,
    Intensity,
}

impl FromStr for DescriptorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grrail" => Ok(DescriptorKind::Grrail),
            "radiomics" => Ok(DescriptorKind::Radiomics),
            "intensity" => Ok(DescriptorKind::Intensity),
            other => Err(Error::InvalidParam(format!("unknown descriptor kind '{other}'"))),
        }
    }
}

impl DescriptorKind {
    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::Grrail => "grrail",
            DescriptorKind::Radiomics => "radiomics",
            DescriptorKind::Intensity => "intensity",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub bins: usize,
    pub u_max: usize,
    pub intensity_u_max: usize,
    pub hist_bins: usize,
    pub edge_policy: EdgePolicy,
    pub weight_policy: WeightPolicy,
    pub target_mm: f64,
    pub resample_mode: ResampleMode,
    pub seed: u64,
    pub kinds: Vec<DescriptorKind>,
    pub target_k: usize,
    pub folds: usize,
    pub trees: usize,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Worker threads; 0 = one per logical CPU.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bins: 16,
            u_max: 5,
            intensity_u_max: 5,
            hist_bins: 32,
            edge_policy: EdgePolicy::Rag26,
            weight_policy: WeightPolicy::Emd,
            target_mm: 1.0,
            resample_mode: ResampleMode::Trilinear,
            seed: 0,
            kinds: vec![DescriptorKind::Grrail],
            target_k: 20,
            folds: 5,
            trees: 500,
            min_leaf: 2,
            max_depth: None,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::InvalidParam("bins must be >= 2".into()));
        }
        if !(1..=12).contains(&self.u_max) {
            return Err(Error::InvalidParam("u_max must be in 1..=12".into()));
        }
        if !(1..=12).contains(&self.intensity_u_max) {
            return Err(Error::InvalidParam("intensity_u_max must be in 1..=12".into()));
        }
        if self.hist_bins < 1 {
            return Err(Error::InvalidParam("hist_bins must be >= 1".into()));
        }
        if !(self.target_mm > 0.0) {
            return Err(Error::InvalidParam("target_mm must be positive".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::InvalidParam("at least one descriptor kind".into()));
        }
        if self.target_k < 1 {
            return Err(Error::InvalidParam("target_k must be >= 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidParam("folds must be >= 2".into()));
        }
        if self.trees < 1 {
            return Err(Error::InvalidParam("trees must be >= 1".into()));
        }
        if self.min_leaf < 1 {
            return Err(Error::InvalidParam("min_leaf must be >= 1".into()));
        }
        Ok(())
    }

    pub fn descriptor_config(&self) -> DescriptorConfig {
        DescriptorConfig {
            bins: self.bins,
            u_max: self.u_max,
            intensity_u_max: self.intensity_u_max,
            hist_bins: self.hist_bins,
            edge_policy: self.edge_policy,
            weight_policy: self.weight_policy,
            seed: self.seed,
        }
    }

    pub fn forest_params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.trees,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed: self.seed,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            folds: self.folds,
            target_k: self.target_k,
            forest: self.forest_params(),
            seed: self.seed,
        }
    }

    /// Applies one `key=value` override.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidParam(format!("bad value '{value}' for {what}"));
        match key {
            "bins" => self.bins = value.parse().map_err(|_| bad("bins"))?,
            "u_max" => self.u_max = value.parse().map_err(|_| bad("u_max"))?,
            "intensity_u_max" => {
                self.intensity_u_max = value.parse().map_err(|_| bad("intensity_u_max"))?
            }
            "hist_bins" => self.hist_bins = value.parse().map_err(|_| bad("hist_bins"))?,
            "edge_policy" => self.edge_policy = value.parse()?,
            "weight_policy" => self.weight_policy = value.parse()?,
            "target_mm" => self.target_mm = value.parse().map_err(|_| bad("target_mm"))?,
            "resample_mode" => self.resample_mode = value.parse()?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "kinds" => {
                self.kinds = value
                    .split('+')
                    .map(str::trim)
                    .map(DescriptorKind::from_str)
                    .collect::<Result<_>>()?
            }
            "target_k" => self.target_k = value.parse().map_err(|_| bad("target_k"))?,
            "folds" => self.folds = value.parse().map_err(|_| bad("folds"))?,
            "trees" => self.trees = value.parse().map_err(|_| bad("trees"))?,
            "min_leaf" => self.min_leaf = value.parse().map_err(|_| bad("min_leaf"))?,
            "max_depth" => {
                self.max_depth = if value == "none" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad("max_depth"))?)
                }
            }
            "threads" => self.threads = value.parse().map_err(|_| bad("threads"))?,
            other => return Err(Error::InvalidParam(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Loads defaults overridden by a key=value file (blank lines and `#`
    /// comments allowed).
    pub fn from_kv_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{line}'")))?;
            cfg.apply_kv(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }
}
