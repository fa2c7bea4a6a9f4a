//! Minimal 3D k-d tree for nearest-neighbor distance queries.
//!
//! Built once per surface; nodes are stored in the point array itself with
//! median splits cycling the axis per depth, so a query is a stack-free
//! recursive descent with branch-and-bound pruning.

pub struct KdTree {
    points: Vec<[f64; 3]>,
}

impl KdTree {
    pub fn build(mut points: Vec<[f64; 3]>) -> Self {
        fn arrange(slice: &mut [[f64; 3]], axis: usize) {
            if slice.len() <= 1 {
                return;
            }
            let mid = slice.len() / 2;
            slice.select_nth_unstable_by(mid, |a, b| {
                a[axis].partial_cmp(&b[axis]).expect("finite coordinates")
            });
            let next = (axis + 1) % 3;
            let (lo, rest) = slice.split_at_mut(mid);
            arrange(lo, next);
            arrange(&mut rest[1..], next);
        }
        arrange(&mut points, 0);
        KdTree { points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Squared Euclidean distance from `query` to the nearest stored point.
    pub fn nearest_sq(&self, query: [f64; 3]) -> f64 {
        assert!(!self.points.is_empty(), "query on empty tree");
        let mut best = f64::INFINITY;
        self.descend(0, self.points.len(), 0, query, &mut best);
        best
    }

    fn descend(&self, lo: usize, hi: usize, axis: usize, query: [f64; 3], best: &mut f64) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let p = self.points[mid];
        let d = dist_sq(p, query);
        if d < *best {
            *best = d;
        }
        let gap = query[axis] - p[axis];
        let next = (axis + 1) % 3;
        let (first, second) = if gap < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.descend(first.0, first.1, next, query, best);
        if gap * gap < *best {
            self.descend(second.0, second.1, next, query, best);
        }
    }
}

pub fn dist_sq(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}
