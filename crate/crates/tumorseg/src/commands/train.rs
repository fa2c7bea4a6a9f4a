use std::path::Path;

use autonet::Tensor;
use segarch::{
    train_detector, train_seg, z_score_per_channel, DetectorSample, SegSample, TrainReport,
};
use volcore::{bbox_of_mask, crop_resize, crop_resize_labels, decompose_regions, ResampleMode};

use crate::config::RunConfig;
use crate::errors::{CliError, Result};
use crate::manifest::{read_scan_manifest, ScanEntry};
use crate::pipeline::{build_window_sets, detector_sample, resolve_source};

fn check_finite(report: &TrainReport, what: &str) -> Result<()> {
    if report.loss_curve.iter().any(|l| !l.is_finite()) {
        return Err(CliError::Numeric(format!(
            "{what} training diverged: loss became non-finite"
        )));
    }
    Ok(())
}

fn region_masks(labels: &[u8], patch_dims: [usize; 3]) -> Result<Tensor<f32>> {
    let [pw, ph, pd] = patch_dims;
    let voxels = pw * ph * pd;
    let mut data = vec![0.0f32; 3 * voxels];
    for (i, &label) in labels.iter().enumerate() {
        let (wt, tc, et) = match label {
            0 => (0.0, 0.0, 0.0),
            2 => (1.0, 0.0, 0.0),
            1 => (1.0, 1.0, 0.0),
            4 => (1.0, 1.0, 1.0),
            other => {
                return Err(CliError::Data(format!(
                    "label volume holds illegal value {other}"
                )));
            }
        };
        data[i] = wt;
        data[voxels + i] = tc;
        data[2 * voxels + i] = et;
    }
    Ok(Tensor::from_vec(&[3, pw, ph, pd], data)?)
}

/// Crops each labeled scan around its tumor and packages patch plus region
/// masks as one training sample. Scans whose labels are empty are skipped
/// with a warning.
fn seg_samples(entries: &[ScanEntry], cfg: &RunConfig) -> Result<Vec<SegSample>> {
    let mut samples = Vec::new();
    for entry in entries {
        let scan = entry.load()?;
        let labels = scan.labels.as_ref().ok_or_else(|| {
            CliError::Data(format!("scan {} has no label volume", entry.scan_id))
        })?;
        let regions = decompose_regions(labels)?;
        let Some(bbox) = bbox_of_mask(&regions.wt) else {
            eprintln!(
                "warning: scan {} has empty labels; skipped for training",
                entry.scan_id
            );
            continue;
        };
        let mut patch = crop_resize(&scan, &bbox, cfg.f_offset, cfg.patch_dims, ResampleMode::Trilinear)?;
        z_score_per_channel(&mut patch);
        let label_crop = crop_resize_labels(labels, &bbox, cfg.f_offset, cfg.patch_dims)?;
        let masks = region_masks(&label_crop, cfg.patch_dims)?;
        samples.push(SegSample { patch, masks });
    }
    Ok(samples)
}

fn write_report(report: &TrainReport, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, report)
        .map_err(|e| CliError::Data(format!("cannot serialize report: {e}")))?;
    use std::io::Write;
    file.write_all(b"\n")?;
    Ok(())
}

/// Trains the patch segmentation network on tumor crops from the manifest.
pub fn run_seg(
    manifest: &Path,
    val_manifest: Option<&Path>,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<()> {
    let entries = read_scan_manifest(manifest)?;
    std::fs::create_dir_all(out_dir)?;
    let train = seg_samples(&entries, cfg)?;
    let val = match val_manifest {
        Some(p) => seg_samples(&read_scan_manifest(p)?, cfg)?,
        None => Vec::new(),
    };
    let (net, report) = train_seg(&train, &val, &cfg.segnet(), &cfg.train_opts())?;
    check_finite(&report, "segmentation")?;
    let ckpt = out_dir.join("seg.ckp");
    net.save(&ckpt).map_err(CliError::from)?;
    write_report(&report, &out_dir.join("seg_report.json"))?;
    let dice = report.train_dice.unwrap_or([f64::NAN; 3]);
    println!(
        "trained segmenter on {} patches, {} iterations in {:.1}s, final loss {:.4}, train dice wt {:.3} tc {:.3} et {:.3} -> {}",
        train.len(),
        report.loss_curve.len(),
        report.wall_clock_secs,
        report.loss_curve.last().copied().unwrap_or(f64::NAN),
        dice[0],
        dice[1],
        dice[2],
        ckpt.display()
    );
    Ok(())
}

/// Trains the slice detector on window sets generated from the manifest.
/// Proposals are drawn from the oracle source since labeling needs ground
/// truth regardless.
pub fn run_detector(manifest: &Path, cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let entries = read_scan_manifest(manifest)?;
    std::fs::create_dir_all(out_dir)?;
    let source = resolve_source("oracle", cfg.seed, None)?;
    let det_cfg = cfg.detector();
    let mut samples: Vec<DetectorSample> = Vec::new();
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
        for set in &sets {
            samples.push(detector_sample(set, &det_cfg)?);
        }
    }
    let (det, report) = train_detector(&samples, &det_cfg, &cfg.train_opts())?;
    check_finite(&report, "detector")?;
    let ckpt = out_dir.join("detector.ckp");
    det.save(&ckpt).map_err(CliError::from)?;
    write_report(&report, &out_dir.join("detector_report.json"))?;
    println!(
        "trained detector on {} slices, {} iterations in {:.1}s, final loss {:.4}, accuracy {:.3} -> {}",
        samples.len(),
        report.loss_curve.len(),
        report.wall_clock_secs,
        report.loss_curve.last().copied().unwrap_or(f64::NAN),
        report.train_accuracy.unwrap_or(f64::NAN),
        ckpt.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_dataset, SyntheticSpec};

    fn tiny_dataset(dir: &Path, seed: u64) -> std::path::PathBuf {
        let spec = SyntheticSpec {
            train: 2,
            test: 1,
            dims: 16,
            radius_frac: 0.25,
            contrast: 0.6,
            noise: 0.05,
            seed,
        };
        generate_dataset(dir, &spec).unwrap().train_manifest
    }

    fn tiny_cfg() -> RunConfig {
        RunConfig::from_text(
            "patch_dims=8,8,8\niterations=3\nlr=0.01\nscales=1\nwindow_size=8,8\nK=4\nproposals_per_window=20\n",
        )
        .unwrap()
    }

    #[test]
    fn seg_training_writes_checkpoint_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), 21);
        let out = dir.path().join("run");
        run_seg(&manifest, None, &tiny_cfg(), &out).unwrap();
        assert!(out.join("seg.ckp").is_file());
        let text = std::fs::read_to_string(out.join("seg_report.json")).unwrap();
        let report: TrainReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report.loss_curve.len(), 3);
        assert!(report.train_dice.is_some());
    }

    #[test]
    fn zero_lr_produces_a_flat_loss_curve() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), 22);
        let out = dir.path().join("run");
        let cfg = RunConfig::from_text(
            "patch_dims=8,8,8\niterations=4\nlr=0\nscales=1\nwindow_size=8,8\nproposals_per_window=20\n",
        )
        .unwrap();
        run_seg(&manifest, None, &cfg, &out).unwrap();
        let text = std::fs::read_to_string(out.join("seg_report.json")).unwrap();
        let report: TrainReport = serde_json::from_str(&text).unwrap();
        let first = report.loss_curve[0];
        assert!(report
            .loss_curve
            .iter()
            .all(|&l| (l - first).abs() < 1e-12 || (l.is_finite() && first.is_finite())));
    }

    #[test]
    fn detector_training_writes_checkpoint_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), 23);
        let out = dir.path().join("run");
        run_detector(&manifest, &tiny_cfg(), &out).unwrap();
        assert!(out.join("detector.ckp").is_file());
        let text = std::fs::read_to_string(out.join("detector_report.json")).unwrap();
        let report: TrainReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report.loss_curve.len(), 3);
        assert!(report.train_accuracy.is_some());
    }

    #[test]
    fn missing_labels_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), 24);
        let text = std::fs::read_to_string(&manifest).unwrap();
        let stripped: String = text
            .lines()
            .map(|l| {
                let cols: Vec<&str> = l.split_whitespace().collect();
                cols[..5].join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n");
        let bare = dir.path().join("bare.txt");
        std::fs::write(&bare, stripped).unwrap();
        let err = run_seg(&bare, None, &tiny_cfg(), &dir.path().join("o")).unwrap_err();
        assert!(matches!(err, CliError::Data(_)));
    }
}
