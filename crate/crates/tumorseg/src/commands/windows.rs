use std::path::Path;

use ctxwin::{write_records, TextRecord, WindowKind};
use segarch::Detector;

use crate::config::RunConfig;
use crate::errors::{CliError, Result};
use crate::manifest::read_scan_manifest;
use crate::pipeline::{build_window_sets, resolve_source};

/// Generates contextual windows and labeled proposals for every scan in the
/// manifest, one text file per scan under `out_dir`.
pub fn run(
    manifest: &Path,
    source_name: &str,
    det_ckpt: Option<&Path>,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<()> {
    let entries = read_scan_manifest(manifest)?;
    std::fs::create_dir_all(out_dir)?;
    let det = match det_ckpt {
        Some(p) => Some(Detector::<f32>::load(&cfg.detector(), p).map_err(CliError::from)?),
        None => None,
    };
    let source = resolve_source(source_name, cfg.seed, det.as_ref())?;
    for entry in &entries {
        let scan = entry.load()?;
        let labels = scan.labels.as_ref().ok_or_else(|| {
            CliError::Data(format!("scan {} has no label volume", entry.scan_id))
        })?;
        let mut skipped = Vec::new();
        let sets = build_window_sets(&scan.modalities[0], labels, cfg, source.as_ref(), &mut skipped)?;
        for sid in &skipped {
            eprintln!(
                "warning: scan {}: scale {sid} image is smaller than the window, skipped",
                entry.scan_id
            );
        }
        let mut records = Vec::new();
        let mut positives = 0usize;
        let mut windows = 0usize;
        let mut proposals = 0usize;
        let mut tumor_span: Option<(usize, usize)> = None;
        let mut scales_used = Vec::new();
        for set in &sets {
            if !scales_used.contains(&set.scale_id) {
                scales_used.push(set.scale_id);
            }
            for w in &set.windows {
                if w.kind == WindowKind::Positive {
                    positives += 1;
                    tumor_span = Some(match tumor_span {
                        None => (set.slice_z, set.slice_z),
                        Some((lo, hi)) => (lo.min(set.slice_z), hi.max(set.slice_z)),
                    });
                }
                windows += 1;
                records.push(TextRecord::Window(*w));
            }
            for lp in &set.labeled {
                proposals += 1;
                records.push(TextRecord::Proposal(lp.proposal));
            }
        }
        if positives == 0 {
            eprintln!(
                "warning: scan {} has empty labels; no positive windows generated",
                entry.scan_id
            );
        }
        let path = out_dir.join(format!("{}.windows.txt", entry.scan_id));
        let mut file = std::fs::File::create(&path)?;
        write_records(&mut file, &records)?;
        let span = match tumor_span {
            Some((lo, hi)) => format!("slices {lo}..={hi}"),
            None => "no tumor slices".to_string(),
        };
        println!(
            "{}: {} windows ({} positive, {}), {} labeled proposals over {} scales -> {}",
            entry.scan_id,
            windows,
            positives,
            span,
            proposals,
            scales_used.len(),
            path.display()
        );
    }
    Ok(())
}
