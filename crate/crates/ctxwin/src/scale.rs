//! Image pyramid bookkeeping and 2D bilinear slice resizing.

use crate::error::{CtxError, Result};
use crate::geom::Rect;

/// One level of the detection pyramid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleSpec {
    pub scale_id: usize,
    pub factor: f64,
    pub scaled_dims: (usize, usize),
}

impl ScaleSpec {
    pub fn new(scale_id: usize, factor: f64, original_dims: (usize, usize)) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(CtxError::InvalidScale(format!(
                "factor must be positive and finite, got {factor}"
            )));
        }
        let w = (original_dims.0 as f64 * factor).round().max(1.0) as usize;
        let h = (original_dims.1 as f64 * factor).round().max(1.0) as usize;
        Ok(ScaleSpec {
            scale_id,
            factor,
            scaled_dims: (w, h),
        })
    }

    /// Maps an original-resolution rect onto this scale, clipped to bounds.
    pub fn to_scaled(&self, r: &Rect) -> Option<Rect> {
        let f = self.factor;
        let x0 = (r.x0 as f64 * f).round() as i64;
        let y0 = (r.y0 as f64 * f).round() as i64;
        let x1 = (r.x1 as f64 * f).round() as i64;
        let y1 = (r.y1 as f64 * f).round() as i64;
        Rect {
            x0,
            y0,
            x1: x1.max(x0),
            y1: y1.max(y0),
        }
        .clip(self.scaled_dims.0, self.scaled_dims.1)
    }

    /// Maps a rect on this scale back to original-resolution coordinates.
    pub fn to_original(&self, r: &Rect, original_dims: (usize, usize)) -> Option<Rect> {
        let f = self.factor;
        let x0 = (r.x0 as f64 / f).round() as i64;
        let y0 = (r.y0 as f64 / f).round() as i64;
        let x1 = (r.x1 as f64 / f).round() as i64;
        let y1 = (r.y1 as f64 / f).round() as i64;
        Rect {
            x0,
            y0,
            x1: x1.max(x0),
            y1: y1.max(y0),
        }
        .clip(original_dims.0, original_dims.1)
    }
}

/// Bilinear resize of a single-channel image, x fastest then y, sample
/// positions running corner-to-corner.
pub fn resize_slice(img: &[f32], dims: (usize, usize), out_dims: (usize, usize)) -> Vec<f32> {
    let (w, h) = dims;
    let (ow, oh) = out_dims;
    assert_eq!(img.len(), w * h, "image length disagrees with dims");
    let pos = |i: usize, n_out: usize, n_in: usize| -> f64 {
        if n_out <= 1 || n_in <= 1 {
            0.0
        } else {
            i as f64 * (n_in - 1) as f64 / (n_out - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(ow * oh);
    for oy in 0..oh {
        let py = pos(oy, oh, h);
        let y0 = py.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = py - y0 as f64;
        for ox in 0..ow {
            let px = pos(ox, ow, w);
            let x0 = px.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let fx = px - x0 as f64;
            let v00 = img[x0 + w * y0] as f64;
            let v10 = img[x1 + w * y0] as f64;
            let v01 = img[x0 + w * y1] as f64;
            let v11 = img[x1 + w * y1] as f64;
            let v = v00 * (1.0 - fx) * (1.0 - fy)
                + v10 * fx * (1.0 - fy)
                + v01 * (1.0 - fx) * fy
                + v11 * fx * fy;
            out.push(v as f32);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_dims_round_and_stay_positive() {
        let s = ScaleSpec::new(0, 0.5, (65, 64)).unwrap();
        assert_eq!(s.scaled_dims, (33, 32));
        let tiny = ScaleSpec::new(1, 0.01, (10, 10)).unwrap();
        assert_eq!(tiny.scaled_dims, (1, 1));
        assert!(ScaleSpec::new(0, 0.0, (10, 10)).is_err());
    }

    #[test]
    fn rect_round_trips_through_unit_scale() {
        let s = ScaleSpec::new(0, 1.0, (64, 64)).unwrap();
        let r = Rect::new(5, 6, 20, 30).unwrap();
        assert_eq!(s.to_scaled(&r).unwrap(), r);
        assert_eq!(s.to_original(&r, (64, 64)).unwrap(), r);
    }

    #[test]
    fn doubling_scale_doubles_coordinates() {
        let s = ScaleSpec::new(2, 2.0, (32, 32)).unwrap();
        let r = Rect::new(3, 4, 10, 12).unwrap();
        let scaled = s.to_scaled(&r).unwrap();
        assert_eq!(scaled, Rect::new(6, 8, 20, 24).unwrap());
        let back = s.to_original(&scaled, (32, 32)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn identity_resize_copies_pixels() {
        let img: Vec<f32> = (0..12).map(|i| i as f32).collect();
        assert_eq!(resize_slice(&img, (4, 3), (4, 3)), img);
    }

    #[test]
    fn constant_image_resizes_to_constant() {
        let img = vec![3.5f32; 30];
        let out = resize_slice(&img, (6, 5), (11, 7));
        assert!(out.iter().all(|&v| (v - 3.5).abs() < 1e-6));
    }

    #[test]
    fn ramp_resize_interpolates_midpoints() {
        let img = vec![0.0f32, 1.0, 2.0];
        let out = resize_slice(&img, (3, 1), (5, 1));
        let want = [0.0, 0.5, 1.0, 1.5, 2.0];
        for (g, w) in out.iter().zip(want) {
            assert!((g - w).abs() < 1e-6);
        }
    }
}
