//! Lift per-slice 2D detections into a single 3D bounding box.

use volcore::Box3;

use crate::geom::Rect;

/// Componentwise min/max over every detection scoring at least `score_floor`,
/// spanning their slice range in z. `None` when nothing clears the floor.
/// Rects must already be in original (unscaled) pixel coordinates.
pub fn aggregate_detections(
    slice_boxes: &[(usize, Rect, f64)],
    score_floor: f64,
) -> Option<Box3> {
    let mut acc: Option<([usize; 3], [usize; 3])> = None;
    for &(z, rect, score) in slice_boxes {
        if score < score_floor {
            continue;
        }
        let lo = [rect.x0.max(0) as usize, rect.y0.max(0) as usize, z];
        let hi = [rect.x1.max(0) as usize, rect.y1.max(0) as usize, z];
        acc = Some(match acc {
            None => (lo, hi),
            Some((a, b)) => (
                [a[0].min(lo[0]), a[1].min(lo[1]), a[2].min(lo[2])],
                [b[0].max(hi[0]), b[1].max(hi[1]), b[2].max(hi[2])],
            ),
        });
    }
    acc.map(|(lo, hi)| Box3::new(lo, hi).expect("min/max accumulation keeps lo <= hi"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_box_spans_its_own_slice() {
        let r = Rect::new(4, 6, 10, 12).unwrap();
        let out = aggregate_detections(&[(10, r, 0.9)], 0.5).unwrap();
        assert_eq!(out.min, [4, 6, 10]);
        assert_eq!(out.max, [10, 12, 10]);
    }

    #[test]
    fn nothing_above_floor_gives_none() {
        let r = Rect::new(0, 0, 5, 5).unwrap();
        assert!(aggregate_detections(&[(0, r, 0.2)], 0.5).is_none());
    }

    #[test]
    fn union_over_slices() {
        let boxes = [
            (3, Rect::new(10, 10, 20, 20).unwrap(), 0.8),
            (7, Rect::new(5, 15, 18, 30).unwrap(), 0.9),
            (5, Rect::new(12, 8, 25, 19).unwrap(), 0.7),
            (9, Rect::new(0, 0, 60, 60).unwrap(), 0.1),
        ];
        let out = aggregate_detections(&boxes, 0.5).unwrap();
        assert_eq!(out.min, [5, 8, 3]);
        assert_eq!(out.max, [25, 30, 7]);
    }
}
