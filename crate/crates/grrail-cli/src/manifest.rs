//! Cohort manifest: a CSV of `subject_id,volume,mask,label,split` rows with
//! paths resolved relative to the manifest's directory.

use grrail_core::{Error, Result, Split};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub volume: PathBuf,
    pub mask: PathBuf,
    pub label: u8,
    pub split: Split,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Table(e.to_string()))?;
        let headers = reader.headers().map_err(|e| Error::Table(e.to_string()))?.clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Table(format!("manifest missing column '{name}'")))
        };
        let (ci, cv, cm, cl, cs) =
            (col("subject_id")?, col("volume")?, col("mask")?, col("label")?, col("split")?);
        let mut entries = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Table(e.to_string()))?;
            let field = |i: usize| -> Result<&str> {
                record.get(i).ok_or_else(|| Error::Table("short manifest row".into()))
            };
            let label: u8 = field(cl)?
                .parse()
                .map_err(|_| Error::Table(format!("bad label '{}'", field(cl).unwrap_or(""))))?;
            if label > 1 {
                return Err(Error::Table(format!("label must be 0 or 1, got {label}")));
            }
            entries.push(ManifestEntry {
                subject_id: field(ci)?.to_string(),
                volume: base.join(field(cv)?),
                mask: base.join(field(cm)?),
                label,
                split: field(cs)?.parse()?,
            });
        }
        if entries.is_empty() {
            return Err(Error::Table("manifest has no rows".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            if !seen.insert(&e.subject_id) {
                return Err(Error::Table(format!("duplicate subject id '{}'", e.subject_id)));
            }
        }
        Ok(Manifest { entries })
    }

    /// Writes a manifest whose paths are already relative to `path`'s dir.
    pub fn write_relative(
        path: &Path,
        rows: &[(String, String, String, u8, Split)],
    ) -> Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "subject_id,volume,mask,label,split")?;
        for (id, vol, mask, label, split) in rows {
            let split = match split {
                Split::Train => "train",
                Split::Test => "test",
            };
            writeln!(out, "{id},{vol},{mask},{label},{split}")?;
        }
        Ok(())
    }

    /// label/split lookup keyed by subject id.
    pub fn label_map(&self) -> std::collections::BTreeMap<String, (u8, Split)> {
        self.entries
            .iter()
            .map(|e| (e.subject_id.clone(), (e.label, e.split)))
            .collect()
    }
}
