//! Per-scan evaluation reports and their JSON/CSV emission.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use volcore::{decompose_regions, Volume, REGION_NAMES};

use crate::counts::{confusion_counts, dice, precision, sensitivity, specificity};
use crate::distance::{assd, hausdorff};
use crate::error::{MetricError, Result};
use crate::surface::surface_voxels;

/// All six metrics for one nested tumor region. Distance metrics and
/// ratio metrics with degenerate denominators are `None`, with the
/// empty-mask flags saying why.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionMetrics {
    pub region: String,
    pub dice: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub hausdorff: Option<f64>,
    pub assd: Option<f64>,
    pub pred_empty: bool,
    pub truth_empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub scan_id: String,
    /// Whole tumor, tumor core, enhancing tumor, in that order.
    pub regions: Vec<RegionMetrics>,
}

pub const METRIC_NAMES: [&str; 6] = [
    "dice",
    "sensitivity",
    "specificity",
    "precision",
    "hausdorff",
    "assd",
];

/// Evaluate a predicted label volume against truth across the three nested
/// regions. `percentile` switches Hausdorff from the maximum to a
/// nearest-rank percentile.
pub fn evaluate_scan(
    scan_id: &str,
    pred: &Volume,
    truth: &Volume,
    percentile: Option<f64>,
) -> Result<ScanReport> {
    if pred.dims != truth.dims {
        return Err(MetricError::DimsMismatch(format!(
            "{:?} vs {:?}",
            pred.dims, truth.dims
        )));
    }
    let pred_regions = decompose_regions(pred)?;
    let truth_regions = decompose_regions(truth)?;
    let mut regions = Vec::with_capacity(REGION_NAMES.len());
    for name in REGION_NAMES {
        let p = pred_regions.by_name(name).expect("known region name");
        let t = truth_regions.by_name(name).expect("known region name");
        let c = confusion_counts(p, t)?;
        let ps = surface_voxels(p);
        let ts = surface_voxels(t);
        let (hauf, mean_sd) = if ps.is_empty() || ts.is_empty() {
            (None, None)
        } else {
            (
                Some(hausdorff(&ps, &ts, percentile)?),
                Some(assd(&ps, &ts)?),
            )
        };
        regions.push(RegionMetrics {
            region: name.to_string(),
            dice: dice(&c),
            sensitivity: sensitivity(&c),
            specificity: specificity(&c),
            precision: precision(&c),
            hausdorff: hauf,
            assd: mean_sd,
            pred_empty: c.pred_empty(),
            truth_empty: c.truth_empty(),
        });
    }
    Ok(ScanReport {
        scan_id: scan_id.to_string(),
        regions,
    })
}

pub fn write_report_json(out: &mut dyn Write, report: &ScanReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)
        .map_err(|e| MetricError::BadReport(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_report_json(input: &mut dyn Read) -> Result<ScanReport> {
    serde_json::from_reader(input).map_err(|e| MetricError::BadReport(e.to_string()))
}

fn metric_value(m: &RegionMetrics, metric: &str) -> Option<f64> {
    match metric {
        "dice" => Some(m.dice),
        "sensitivity" => m.sensitivity,
        "specificity" => m.specificity,
        "precision" => m.precision,
        "hausdorff" => m.hausdorff,
        "assd" => m.assd,
        _ => unreachable!("unknown metric column"),
    }
}

fn format_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => "NA".to_string(),
    }
}

/// CSV grid: one row per scan (sorted by scan id), one column per
/// region-metric pair, with `mean` and `std` footer rows over the defined
/// cells (population standard deviation).
pub fn write_csv_aggregate(out: &mut dyn Write, reports: &[ScanReport]) -> Result<()> {
    let mut ordered: Vec<&ScanReport> = reports.iter().collect();
    ordered.sort_by(|a, b| a.scan_id.cmp(&b.scan_id));

    let mut header = vec!["scan_id".to_string()];
    for region in REGION_NAMES {
        for metric in METRIC_NAMES {
            header.push(format!("{region}_{metric}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len() - 1];
    for report in &ordered {
        let mut row = vec![report.scan_id.clone()];
        for (ri, region) in REGION_NAMES.iter().enumerate() {
            let metrics = report
                .regions
                .iter()
                .find(|m| m.region == *region)
                .ok_or_else(|| MetricError::BadReport(format!("missing region {region}")))?;
            for (mi, metric) in METRIC_NAMES.iter().enumerate() {
                let v = metric_value(metrics, metric);
                if let Some(x) = v {
                    columns[ri * METRIC_NAMES.len() + mi].push(x);
                }
                row.push(format_cell(v));
            }
        }
        writeln!(out, "{}", row.join(","))?;
    }

    let stat_row = |label: &str, f: &dyn Fn(&[f64]) -> Option<f64>| -> String {
        let mut row = vec![label.to_string()];
        for col in &columns {
            row.push(format_cell(f(col)));
        }
        row.join(",")
    };
    let mean = |xs: &[f64]| {
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    };
    let std = |xs: &[f64]| {
        mean(xs).map(|m| {
            (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
        })
    };
    writeln!(out, "{}", stat_row("mean", &mean))?;
    writeln!(out, "{}", stat_row("std", &std))?;
    Ok(())
}
