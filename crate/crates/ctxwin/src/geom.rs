//! Pixel rectangles with inclusive bounds, and intersection-over-union.

use crate::error::{CtxError, Result};

/// Axis-aligned rectangle on a slice; all four coordinates are inclusive
/// pixel indices, so a single pixel is `x0 == x1, y0 == y1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Result<Self> {
        if x0 > x1 || y0 > y1 {
            return Err(CtxError::InvalidRect(format!(
                "({x0},{y0})..({x1},{y1}) has inverted bounds"
            )));
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }

    /// Pixel-grid center; half-integral for even extents.
    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 + self.x1) as f64 / 2.0,
            (self.y0 + self.y1) as f64 / 2.0,
        )
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        self.x0 as f64 <= x && x <= self.x1 as f64 && self.y0 as f64 <= y && y <= self.y1 as f64
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x0 <= other.x0 && other.x1 <= self.x1 && self.y0 <= other.y0 && other.y1 <= self.y1
    }

    /// Clips to the image `[0, w-1] x [0, h-1]`; `None` when fully outside.
    pub fn clip(&self, w: usize, h: usize) -> Option<Rect> {
        let x0 = self.x0.max(0);
        let y0 = self.y0.max(0);
        let x1 = self.x1.min(w as i64 - 1);
        let y1 = self.y1.min(h as i64 - 1);
        if x0 > x1 || y0 > y1 {
            None
        } else {
            Some(Rect { x0, y0, x1, y1 })
        }
    }

    pub fn within(&self, w: usize, h: usize) -> bool {
        self.x0 >= 0 && self.y0 >= 0 && self.x1 < w as i64 && self.y1 < h as i64
    }
}

/// Intersection over union counting integer pixels with inclusive bounds.
pub fn iou(a: &Rect, b: &Rect) -> f64 {
    let ix0 = a.x0.max(b.x0);
    let iy0 = a.y0.max(b.y0);
    let ix1 = a.x1.min(b.x1);
    let iy1 = a.y1.min(b.y1);
    if ix0 > ix1 || iy0 > iy1 {
        return 0.0;
    }
    let inter = (ix1 - ix0 + 1) * (iy1 - iy0 + 1);
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}
