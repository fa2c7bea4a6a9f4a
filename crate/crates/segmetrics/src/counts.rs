//! Voxel confusion counts and the area-based metrics built on them.
//!
//! Degenerate denominators yield `None` rather than a fake score; dice alone
//! carries a convention (two empty masks agree perfectly, so 1.0).

use volcore::{Volume, VoxelData};

use crate::error::{MetricError, Result};

/// Is linear voxel `i` foreground (nonzero)?
pub(crate) fn foreground(v: &Volume, i: usize) -> bool {
    match &v.data {
        VoxelData::F32(d) => d[i] != 0.0,
        VoxelData::U8(d) => d[i] != 0,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn pred_empty(&self) -> bool {
        self.true_pos + self.false_pos == 0
    }

    pub fn truth_empty(&self) -> bool {
        self.true_pos + self.false_neg == 0
    }
}

/// Exhaustive voxel tally of a binary prediction against binary truth;
/// any nonzero voxel counts as foreground.
pub fn confusion_counts(pred: &Volume, truth: &Volume) -> Result<ConfusionCounts> {
    if !pred.same_grid(truth) {
        return Err(MetricError::DimsMismatch(format!(
            "{:?} vs {:?}",
            pred.dims, truth.dims
        )));
    }
    let mut c = ConfusionCounts::default();
    let n = pred.dims[0] * pred.dims[1] * pred.dims[2];
    for i in 0..n {
        let p = foreground(pred, i);
        let t = foreground(truth, i);
        match (p, t) {
            (true, true) => c.true_pos += 1,
            (true, false) => c.false_pos += 1,
            (false, true) => c.false_neg += 1,
            (false, false) => c.true_neg += 1,
        }
    }
    Ok(c)
}

/// 2·TP / (2·TP + FP + FN); both masks empty → 1.0 by convention.
pub fn dice(c: &ConfusionCounts) -> f64 {
    let den = 2 * c.true_pos + c.false_pos + c.false_neg;
    if den == 0 {
        1.0
    } else {
        2.0 * c.true_pos as f64 / den as f64
    }
}

/// TP / (TP + FN); `None` when the truth mask is empty.
pub fn sensitivity(c: &ConfusionCounts) -> Option<f64> {
    let den = c.true_pos + c.false_neg;
    (den != 0).then(|| c.true_pos as f64 / den as f64)
}

/// TN / (TN + FP); `None` when the truth background is empty.
pub fn specificity(c: &ConfusionCounts) -> Option<f64> {
    let den = c.true_neg + c.false_pos;
    (den != 0).then(|| c.true_neg as f64 / den as f64)
}

/// TP / (TP + FP); `None` when the prediction is empty.
pub fn precision(c: &ConfusionCounts) -> Option<f64> {
    let den = c.true_pos + c.false_pos;
    (den != 0).then(|| c.true_pos as f64 / den as f64)
}
