//! Surface distances: Hausdorff (max or percentile) and average symmetric
//! surface distance, in physical millimeters.

use crate::error::{MetricError, Result};
use crate::kdtree::KdTree;
use crate::surface::SurfaceSet;

fn check_pair(a: &SurfaceSet, b: &SurfaceSet, context: &str) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySurface {
            context: context.into(),
        });
    }
    if a.spacing != b.spacing {
        return Err(MetricError::SpacingMismatch(a.spacing, b.spacing));
    }
    Ok(())
}

/// Every point's distance to the nearest point of the other surface.
fn directed_distances(from: &SurfaceSet, to: &SurfaceSet) -> Vec<f64> {
    let tree = KdTree::build(to.physical_points());
    from.physical_points()
        .into_iter()
        .map(|p| tree.nearest_sq(p).sqrt())
        .collect()
}

/// Nearest-rank percentile of an unsorted distance list; 100 is the maximum.
fn nearest_rank(mut values: Vec<f64>, percentile: f64) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let n = values.len();
    let rank = ((percentile / 100.0) * n as f64).ceil() as usize;
    values[rank.clamp(1, n) - 1]
}

/// Symmetric Hausdorff distance: the larger of the two directed max-min
/// distances. With `percentile` (in (0, 100]) each directed list is reduced
/// by nearest-rank percentile instead of the maximum.
pub fn hausdorff(pred: &SurfaceSet, truth: &SurfaceSet, percentile: Option<f64>) -> Result<f64> {
    check_pair(pred, truth, "hausdorff")?;
    if let Some(p) = percentile {
        if !(p > 0.0 && p <= 100.0) {
            return Err(MetricError::BadPercentile(p));
        }
    }
    let p = percentile.unwrap_or(100.0);
    let fwd = nearest_rank(directed_distances(pred, truth), p);
    let bwd = nearest_rank(directed_distances(truth, pred), p);
    Ok(fwd.max(bwd))
}

/// Average symmetric surface distance: all directed distances from both
/// sides, averaged over the total number of surface voxels.
pub fn assd(pred: &SurfaceSet, truth: &SurfaceSet) -> Result<f64> {
    check_pair(pred, truth, "assd")?;
    let fwd = directed_distances(pred, truth);
    let bwd = directed_distances(truth, pred);
    // per-list sums first: two-term addition commutes, so the result is
    // bitwise identical under argument swap
    let total = fwd.iter().sum::<f64>() + bwd.iter().sum::<f64>();
    Ok(total / (fwd.len() + bwd.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surf(points: Vec<[usize; 3]>, spacing: [f32; 3]) -> SurfaceSet {
        SurfaceSet { points, spacing }
    }

    #[test]
    fn identical_surfaces_are_at_zero() {
        let s = surf(vec![[0, 0, 0], [3, 1, 2], [5, 5, 5]], [1.0; 3]);
        assert_eq!(hausdorff(&s, &s, None).unwrap(), 0.0);
        assert_eq!(assd(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn single_voxels_three_apart() {
        let a = surf(vec![[0, 0, 0]], [1.0; 3]);
        let b = surf(vec![[0, 0, 3]], [1.0; 3]);
        assert_eq!(hausdorff(&a, &b, None).unwrap(), 3.0);
        assert_eq!(assd(&a, &b).unwrap(), 3.0);
    }

    #[test]
    fn spacing_scales_distances() {
        let a = surf(vec![[0, 0, 0]], [1.0, 1.0, 2.5]);
        let b = surf(vec![[0, 0, 3]], [1.0, 1.0, 2.5]);
        assert_eq!(hausdorff(&a, &b, None).unwrap(), 7.5);
    }

    #[test]
    fn directed_asymmetry_resolved_by_outer_max() {
        // a has an outlier far from b; b sits entirely near a
        let a = surf(vec![[0, 0, 0], [10, 0, 0]], [1.0; 3]);
        let b = surf(vec![[0, 0, 0]], [1.0; 3]);
        assert_eq!(hausdorff(&a, &b, None).unwrap(), 10.0);
        assert_eq!(hausdorff(&b, &a, None).unwrap(), 10.0);
        // assd: distances a->b are {0,10}, b->a {0}; mean over 3
        assert!((assd(&a, &b).unwrap() - 10.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn percentile_trims_outliers() {
        // 10 points: nine at distance 0 from b's line, one at distance 100
        let mut pts: Vec<[usize; 3]> = (0..9).map(|i| [i, 0, 0]).collect();
        pts.push([0, 100, 0]);
        let a = surf(pts, [1.0; 3]);
        let b = surf((0..9).map(|i| [i, 0, 0]).collect(), [1.0; 3]);
        assert_eq!(hausdorff(&a, &b, None).unwrap(), 100.0);
        // 90th percentile of a->b: rank ceil(0.9*10)=9 of {0x9, 100} -> 0
        assert_eq!(hausdorff(&a, &b, Some(90.0)).unwrap(), 0.0);
    }

    #[test]
    fn empty_surface_is_an_error() {
        let a = surf(vec![], [1.0; 3]);
        let b = surf(vec![[0, 0, 0]], [1.0; 3]);
        assert!(matches!(
            hausdorff(&a, &b, None),
            Err(MetricError::EmptySurface { .. })
        ));
        assert!(matches!(assd(&b, &a), Err(MetricError::EmptySurface { .. })));
    }

    #[test]
    fn mismatched_spacing_is_an_error() {
        let a = surf(vec![[0, 0, 0]], [1.0; 3]);
        let b = surf(vec![[0, 0, 0]], [2.0; 3]);
        assert!(matches!(
            hausdorff(&a, &b, None),
            Err(MetricError::SpacingMismatch(..))
        ));
    }

    #[test]
    fn silly_percentile_is_rejected() {
        let s = surf(vec![[0, 0, 0]], [1.0; 3]);
        assert!(matches!(
            hausdorff(&s, &s, Some(0.0)),
            Err(MetricError::BadPercentile(_))
        ));
        assert!(matches!(
            hausdorff(&s, &s, Some(101.0)),
            Err(MetricError::BadPercentile(_))
        ));
    }
}
