use std::io::Write;
use std::path::{Path, PathBuf};

use segarch::{
    detect_slices, infer_cascade, oracle_slice_boxes, Detector, SegNet,
};
use volcore::write_volume;

use crate::config::RunConfig;
use crate::errors::{CliError, Result};
use crate::manifest::{read_scan_manifest, ScanEntry};

struct ScanOutcome {
    scan_id: String,
    pred_file: String,
    used_fallback: bool,
}

fn infer_one(
    entry: &ScanEntry,
    net: &SegNet<f32>,
    det: Option<&Detector<f32>>,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<ScanOutcome> {
    let scan = entry.load()?;
    let slice_boxes = match det {
        Some(d) => detect_slices(d, &scan).map_err(CliError::from)?,
        None => {
            let labels = scan.labels.as_ref().ok_or_else(|| {
                CliError::Data(format!(
                    "scan {}: oracle detection needs a label volume in the manifest",
                    entry.scan_id
                ))
            })?;
            oracle_slice_boxes(labels)
        }
    };
    let outcome = infer_cascade(&scan, &slice_boxes, net, &cfg.cascade())?;
    let pred_file = format!("{}_pred.vvl", entry.scan_id);
    write_volume(&outcome.labels, &out_dir.join(&pred_file))?;
    Ok(ScanOutcome {
        scan_id: entry.scan_id.clone(),
        pred_file,
        used_fallback: outcome.used_fallback,
    })
}

/// Runs the full cascade over every scan in the manifest, writing one
/// predicted label volume per scan plus a prediction manifest. Work is
/// split across `jobs` threads; output order is by scan id regardless.
pub fn run(
    manifest: &Path,
    seg_ckpt: &Path,
    detection: &str,
    det_ckpt: Option<&Path>,
    cfg: &RunConfig,
    out_dir: &Path,
    jobs: usize,
) -> Result<PathBuf> {
    let entries = read_scan_manifest(manifest)?;
    std::fs::create_dir_all(out_dir)?;
    let net = SegNet::<f32>::load(&cfg.segnet(), seg_ckpt).map_err(CliError::from)?;
    let det = match detection {
        "detector" => {
            let p = det_ckpt.ok_or_else(|| {
                CliError::Usage("detection source 'detector' needs --det-ckpt".into())
            })?;
            Some(Detector::<f32>::load(&cfg.detector(), p).map_err(CliError::from)?)
        }
        "oracle" => None,
        other => {
            return Err(CliError::Usage(format!(
                "unknown detection source '{other}' (known: oracle, detector)"
            )));
        }
    };

    let jobs = jobs.max(1).min(entries.len().max(1));
    let chunk = entries.len().div_ceil(jobs);
    let mut results: Vec<Result<ScanOutcome>> = Vec::with_capacity(entries.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for piece in entries.chunks(chunk) {
            let net = &net;
            let det = det.as_ref();
            handles.push(scope.spawn(move || {
                piece
                    .iter()
                    .map(|e| infer_one(e, net, det, cfg, out_dir))
                    .collect::<Vec<_>>()
            }));
        }
        for h in handles {
            results.extend(h.join().expect("inference worker panicked"));
        }
    });

    let mut outcomes = Vec::with_capacity(results.len());
    for r in results {
        outcomes.push(r?);
    }
    outcomes.sort_by(|a, b| a.scan_id.cmp(&b.scan_id));
    for o in &outcomes {
        if o.used_fallback {
            eprintln!(
                "warning: scan {}: no detection above the score floor, segmented the whole volume",
                o.scan_id
            );
        }
    }
    let manifest_path = out_dir.join("pred_manifest.txt");
    let mut f = std::fs::File::create(&manifest_path)?;
    for o in &outcomes {
        writeln!(f, "{} {}", o.scan_id, o.pred_file)?;
    }
    println!(
        "segmented {} scans -> {}",
        outcomes.len(),
        manifest_path.display()
    );
    Ok(manifest_path)
}
