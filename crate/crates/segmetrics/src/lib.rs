//! Segmentation evaluation: voxel confusion counts with the four area-based
//! ratios, 6-connectivity surface extraction, Hausdorff and average symmetric
//! surface distance in physical millimeters, and per-scan reports aggregated
//! into a region-by-metric CSV grid.

pub mod counts;
pub mod distance;
pub mod error;
pub mod kdtree;
pub mod report;
pub mod surface;

pub use counts::{
    confusion_counts, dice, precision, sensitivity, specificity, ConfusionCounts,
};
pub use distance::{assd, hausdorff};
pub use error::{MetricError, Result};
pub use report::{
    evaluate_scan, read_report_json, write_csv_aggregate, write_report_json, RegionMetrics,
    ScanReport, METRIC_NAMES,
};
pub use surface::{surface_voxels, SurfaceSet};
