use std::path::{Path, PathBuf};

use volcore::{read_volume, MultiModalScan, Volume};

use crate::errors::{CliError, Result};

/// One scan's files as listed in a dataset manifest: four modality volumes in
/// flair/t1/t1c/t2 order and an optional label volume.
#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub scan_id: String,
    pub modalities: [PathBuf; 4],
    pub labels: Option<PathBuf>,
}

fn resolve(base: &Path, raw: &str) -> PathBuf {
    let p = PathBuf::from(raw);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// Reads a scan manifest: one scan per line, whitespace-separated columns
/// `scan_id flair t1 t1c t2 [labels]`, paths relative to the manifest file.
/// Blank lines and `#` comments are skipped.
pub fn read_scan_manifest(path: &Path) -> Result<Vec<ScanEntry>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 && cols.len() != 6 {
            return Err(CliError::Data(format!(
                "manifest {} line {}: expected 'scan_id flair t1 t1c t2 [labels]', got {} columns",
                path.display(),
                idx + 1,
                cols.len()
            )));
        }
        if !seen.insert(cols[0].to_string()) {
            return Err(CliError::Data(format!(
                "manifest {} lists scan id {} twice",
                path.display(),
                cols[0]
            )));
        }
        entries.push(ScanEntry {
            scan_id: cols[0].to_string(),
            modalities: [
                resolve(&base, cols[1]),
                resolve(&base, cols[2]),
                resolve(&base, cols[3]),
                resolve(&base, cols[4]),
            ],
            labels: cols.get(5).map(|c| resolve(&base, c)),
        });
    }
    if entries.is_empty() {
        return Err(CliError::Data(format!(
            "manifest {} lists no scans",
            path.display()
        )));
    }
    entries.sort_by(|a, b| a.scan_id.cmp(&b.scan_id));
    Ok(entries)
}

impl ScanEntry {
    pub fn load(&self) -> Result<MultiModalScan> {
        let mut vols = Vec::with_capacity(4);
        for p in &self.modalities {
            vols.push(read_volume(p)?);
        }
        let modalities: [Volume; 4] = vols.try_into().expect("four modality paths");
        let labels = match &self.labels {
            Some(p) => Some(read_volume(p)?),
            None => None,
        };
        Ok(MultiModalScan::new(self.scan_id.clone(), modalities, labels)?)
    }
}

/// Reads a two-column `scan_id path` manifest naming one label volume per
/// scan, as produced by `infer` and consumed by `evaluate`.
pub fn read_label_manifest(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(CliError::Data(format!(
                "manifest {} line {}: expected 'scan_id path'",
                path.display(),
                idx + 1
            )));
        }
        if !seen.insert(cols[0].to_string()) {
            return Err(CliError::Data(format!(
                "manifest {} lists scan id {} twice",
                path.display(),
                cols[0]
            )));
        }
        entries.push((cols[0].to_string(), resolve(&base, cols[1])));
    }
    if entries.is_empty() {
        return Err(CliError::Data(format!(
            "manifest {} lists no scans",
            path.display()
        )));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(entries)
}
