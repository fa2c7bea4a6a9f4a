//! Window grids and the positive/negative context-window mining rules.
//!
//! Positive windows double a ground-truth box around its center. Negative
//! windows are grid windows picked greedily: repeatedly take the window
//! covering the most not-yet-covered leftover proposal centers (raster order
//! breaks ties) while that count reaches the minimum, marking covered centers
//! as spent.

use crate::error::{CtxError, Result};
use crate::geom::Rect;
use crate::proposals::Proposal;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowKind {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub rect: Rect,
    pub scale_id: usize,
    pub kind: WindowKind,
}

/// Stride positions along one axis: multiples of `stride` while the window
/// fits, plus a final inward-shifted position when the last pixel would
/// otherwise go uncovered.
fn axis_positions(extent: usize, window: usize, stride: usize) -> Vec<i64> {
    let mut out = Vec::new();
    let mut pos = 0usize;
    while pos + window <= extent {
        out.push(pos as i64);
        pos += stride;
    }
    let last_covered = out.last().map(|&p| p as usize + window - 1);
    if last_covered != Some(extent - 1) {
        out.push((extent - window) as i64);
    }
    out
}

/// Raster-ordered grid of `k1 x k2` window rects at the given stride; every
/// image pixel is covered by at least one window.
pub fn enumerate_windows(
    scaled_dims: (usize, usize),
    window_dims: (usize, usize),
    stride: usize,
) -> Result<Vec<Rect>> {
    let (w, h) = scaled_dims;
    let (k1, k2) = window_dims;
    if k1 > w || k2 > h {
        return Err(CtxError::WindowLargerThanImage {
            window: window_dims,
            image: scaled_dims,
        });
    }
    if k1 == 0 || k2 == 0 || stride == 0 {
        return Err(CtxError::InvalidRect(
            "window dims and stride must be >= 1".into(),
        ));
    }
    // a raster grid can only promise full pixel coverage when consecutive
    // windows overlap or touch
    if stride > k1.min(k2) {
        return Err(CtxError::InvalidRect(format!(
            "stride {stride} exceeds window extent {}x{}",
            k1, k2
        )));
    }
    let xs = axis_positions(w, k1, stride);
    let ys = axis_positions(h, k2, stride);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for &y0 in &ys {
        for &x0 in &xs {
            out.push(Rect {
                x0,
                y0,
                x1: x0 + k1 as i64 - 1,
                y1: y0 + k2 as i64 - 1,
            });
        }
    }
    Ok(out)
}

/// One window per ground-truth box: same center, twice the width and height,
/// clipped to image bounds. The ground truth always stays contained.
pub fn positive_windows(
    gt_boxes: &[Rect],
    scaled_dims: (usize, usize),
    scale_id: usize,
) -> Vec<Window> {
    gt_boxes
        .iter()
        .map(|gt| {
            let (w, h) = (gt.width(), gt.height());
            let grown = Rect {
                x0: gt.x0 - w / 2,
                y0: gt.y0 - h / 2,
                x1: gt.x1 + (w - w / 2),
                y1: gt.y1 + (h - h / 2),
            };
            let rect = grown
                .clip(scaled_dims.0, scaled_dims.1)
                .expect("a ground-truth box inside the image cannot clip away");
            Window {
                rect,
                scale_id,
                kind: WindowKind::Positive,
            }
        })
        .collect()
}

/// Greedy negative-window mining over leftover proposals. A proposal is
/// "covered" by a window when its center lies inside the window rect.
pub fn negative_windows(
    proposals: &[Proposal],
    positives: &[Window],
    grid: &[Rect],
    min_proposals: usize,
    scale_id: usize,
) -> Vec<Window> {
    // leftover proposals: centers outside every positive window
    let centers: Vec<(f64, f64)> = proposals
        .iter()
        .map(|p| p.rect.center())
        .filter(|&(cx, cy)| {
            !positives
                .iter()
                .any(|w| w.rect.contains_point(cx, cy))
        })
        .collect();

    let mut covered = vec![false; centers.len()];
    let mut picked = Vec::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (wi, rect) in grid.iter().enumerate() {
            let count = centers
                .iter()
                .zip(&covered)
                .filter(|(&(cx, cy), &c)| !c && rect.contains_point(cx, cy))
                .count();
            let better = match best {
                None => count > 0,
                Some((_, best_count)) => count > best_count,
            };
            if better {
                best = Some((wi, count));
            }
        }
        match best {
            Some((wi, count)) if count >= min_proposals => {
                for (i, &(cx, cy)) in centers.iter().enumerate() {
                    if !covered[i] && grid[wi].contains_point(cx, cy) {
                        covered[i] = true;
                    }
                }
                picked.push(Window {
                    rect: grid[wi],
                    scale_id,
                    kind: WindowKind::Negative,
                });
            }
            _ => break,
        }
    }
    picked
}
