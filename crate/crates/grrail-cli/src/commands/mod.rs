pub mod classify;
pub mod cluster;
pub mod descriptor;
pub mod extract;
pub mod graph;
pub mod phantom;
pub mod plot;
pub mod resample;
pub mod stats;

use grrail_core::{Error, FeatureId, FeatureMap, Result, RoiIndex, RoiMask, VoxelGrid};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Subject directories below a stage output, sorted by name for
/// deterministic iteration.
pub fn subject_dirs(stage_dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(stage_dir)? {
        let entry = entry?;
        if entry.file_type()?.is_dir() {
            let name = entry
                .file_name()
                .into_string()
                .map_err(|_| Error::Parse("non-utf8 subject directory name".into()))?;
            out.push((name, entry.path()));
        }
    }
    if out.is_empty() {
        return Err(Error::Table(format!("no subject directories under {}", stage_dir.display())));
    }
    out.sort();
    Ok(out)
}

/// Loads one extracted feature map (dense volume + subject mask) back into
/// its ROI-aligned form.
pub fn load_feature_map(
    subject_dir: &Path,
    feature: FeatureId,
    mask: &RoiMask,
    roi: &Arc<RoiIndex>,
    bins: usize,
) -> Result<FeatureMap> {
    let grid = grrail_core::load_volume(&subject_dir.join(format!("{}.rvh", feature.name())))?;
    if grid.dims != mask.dims {
        return Err(Error::DimsMismatch { grid: grid.dims.as_tuple(), mask: mask.dims.as_tuple() });
    }
    let values: Vec<f64> = roi.linear.iter().map(|&idx| grid.values[idx]).collect();
    Ok(FeatureMap { dims: grid.dims, feature, bins, roi: Arc::clone(roi), values })
}

/// Densifies ROI-aligned values into a full grid (fill value outside).
pub fn densify(values: &[f64], roi: &RoiIndex, fill: f64) -> Vec<f64> {
    let mut dense = vec![fill; roi.dims.len()];
    for (pos, &idx) in roi.linear.iter().enumerate() {
        dense[idx] = values[pos];
    }
    dense
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Parse(format!("json encode: {e}")))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}
