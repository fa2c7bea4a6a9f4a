use std::path::{Path, PathBuf};

use segmetrics::{evaluate_scan, write_csv_aggregate, write_report_json, ScanReport};
use volcore::read_volume;

use crate::errors::{CliError, Result};
use crate::manifest::read_label_manifest;

fn check_same_ids(pred: &[(String, PathBuf)], truth: &[(String, PathBuf)]) -> Result<()> {
    let pred_ids: Vec<&str> = pred.iter().map(|(id, _)| id.as_str()).collect();
    let truth_ids: Vec<&str> = truth.iter().map(|(id, _)| id.as_str()).collect();
    if pred_ids == truth_ids {
        return Ok(());
    }
    let missing_pred: Vec<&&str> = truth_ids.iter().filter(|i| !pred_ids.contains(i)).collect();
    let missing_truth: Vec<&&str> = pred_ids.iter().filter(|i| !truth_ids.contains(i)).collect();
    Err(CliError::Data(format!(
        "prediction and truth manifests list different scans (missing predictions: {missing_pred:?}, missing truth: {missing_truth:?})"
    )))
}

/// Scores every predicted label volume against its truth volume, writing one
/// JSON report per scan and a CSV aggregate with mean and std rows.
pub fn run(
    pred_manifest: &Path,
    truth_manifest: &Path,
    percentile: Option<f64>,
    out_dir: &Path,
    jobs: usize,
) -> Result<()> {
    let pred = read_label_manifest(pred_manifest)?;
    let truth = read_label_manifest(truth_manifest)?;
    check_same_ids(&pred, &truth)?;
    std::fs::create_dir_all(out_dir)?;

    let pairs: Vec<(usize, &(String, PathBuf), &(String, PathBuf))> = pred
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p, &truth[i]))
        .collect();
    let jobs = jobs.max(1).min(pairs.len().max(1));
    let chunk = pairs.len().div_ceil(jobs);
    let mut results: Vec<Result<ScanReport>> = Vec::with_capacity(pairs.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for piece in pairs.chunks(chunk) {
            handles.push(scope.spawn(move || {
                piece
                    .iter()
                    .map(|(_, (id, pred_path), (_, truth_path))| {
                        let p = read_volume(pred_path)?;
                        let t = read_volume(truth_path)?;
                        Ok(evaluate_scan(id, &p, &t, percentile)?)
                    })
                    .collect::<Vec<Result<ScanReport>>>()
            }));
        }
        for h in handles {
            results.extend(h.join().expect("evaluation worker panicked"));
        }
    });

    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        reports.push(r?);
    }
    reports.sort_by(|a, b| a.scan_id.cmp(&b.scan_id));
    for report in &reports {
        let path = out_dir.join(format!("{}_report.json", report.scan_id));
        let mut f = std::fs::File::create(&path)?;
        write_report_json(&mut f, report)?;
    }
    let csv_path = out_dir.join("aggregate.csv");
    let mut f = std::fs::File::create(&csv_path)?;
    write_csv_aggregate(&mut f, &reports)?;

    let mut dice_sums = [0.0f64; 3];
    for r in &reports {
        for (i, region) in r.regions.iter().enumerate().take(3) {
            dice_sums[i] += region.dice;
        }
    }
    let n = reports.len() as f64;
    println!(
        "evaluated {} scans, mean dice wt {:.4} tc {:.4} et {:.4} -> {}",
        reports.len(),
        dice_sums[0] / n,
        dice_sums[1] / n,
        dice_sums[2] / n,
        csv_path.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use volcore::{write_volume, Volume};

    fn label_volume(dir: &Path, name: &str, fill: &[u8]) -> PathBuf {
        let vol = Volume::u8([2, 2, 2], [1.0; 3], fill.to_vec()).unwrap();
        let p = dir.join(name);
        write_volume(&vol, &p).unwrap();
        p
    }

    fn manifest(dir: &Path, name: &str, lines: &[(&str, &str)]) -> PathBuf {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        for (id, file) in lines {
            writeln!(f, "{id} {file}").unwrap();
        }
        p
    }

    #[test]
    fn mismatched_scan_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        label_volume(dir.path(), "a.vvl", &[0, 1, 2, 4, 0, 0, 0, 0]);
        let pred = manifest(dir.path(), "pred.txt", &[("s1", "a.vvl")]);
        let truth = manifest(dir.path(), "truth.txt", &[("s2", "a.vvl")]);
        let err = run(&pred, &truth, None, &dir.path().join("o"), 1).unwrap_err();
        assert!(err.to_string().contains("different scans"));
    }

    #[test]
    fn perfect_prediction_scores_dice_one_everywhere() {
        let dir = tempfile::tempdir().unwrap();
        label_volume(dir.path(), "v.vvl", &[0, 1, 2, 4, 0, 1, 2, 4]);
        let pred = manifest(dir.path(), "pred.txt", &[("s1", "v.vvl")]);
        let truth = manifest(dir.path(), "truth.txt", &[("s1", "v.vvl")]);
        let out = dir.path().join("o");
        run(&pred, &truth, None, &out, 1).unwrap();
        let text = std::fs::read_to_string(out.join("s1_report.json")).unwrap();
        let report: ScanReport = serde_json::from_str(&text).unwrap();
        for region in &report.regions {
            assert_eq!(region.dice, 1.0);
        }
        assert!(out.join("aggregate.csv").is_file());
    }

    #[test]
    fn aggregate_is_identical_when_manifest_order_is_shuffled() {
        let dir = tempfile::tempdir().unwrap();
        label_volume(dir.path(), "a.vvl", &[0, 1, 2, 4, 0, 0, 0, 0]);
        label_volume(dir.path(), "b.vvl", &[4, 4, 2, 2, 1, 1, 0, 0]);
        label_volume(dir.path(), "ta.vvl", &[0, 1, 2, 2, 0, 0, 0, 4]);
        label_volume(dir.path(), "tb.vvl", &[4, 2, 2, 2, 1, 1, 0, 0]);
        let pred1 = manifest(dir.path(), "p1.txt", &[("s1", "a.vvl"), ("s2", "b.vvl")]);
        let truth1 = manifest(dir.path(), "t1.txt", &[("s1", "ta.vvl"), ("s2", "tb.vvl")]);
        let pred2 = manifest(dir.path(), "p2.txt", &[("s2", "b.vvl"), ("s1", "a.vvl")]);
        let truth2 = manifest(dir.path(), "t2.txt", &[("s2", "tb.vvl"), ("s1", "ta.vvl")]);
        let out1 = dir.path().join("o1");
        let out2 = dir.path().join("o2");
        run(&pred1, &truth1, None, &out1, 1).unwrap();
        run(&pred2, &truth2, None, &out2, 2).unwrap();
        let a = std::fs::read(out1.join("aggregate.csv")).unwrap();
        let b = std::fs::read(out2.join("aggregate.csv")).unwrap();
        assert_eq!(a, b);
    }
}
