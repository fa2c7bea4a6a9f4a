//! Crop-and-resize: hands a detected region to the segmentation network as a
//! fixed-size tensor.
//!
//! The detection box is grown by an offset on every axis in both directions,
//! clipped to the volume (no invented intensities), then resampled to the
//! requested output grid. Sample positions run corner-to-corner across the
//! grown box; intensities interpolate trilinearly, labels take the nearest
//! voxel.

use crate::boxes::Box3;
use crate::error::{Result, VolError};
use crate::volume::{MultiModalScan, Volume};
use autonet::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResampleMode {
    Trilinear,
    Nearest,
}

/// Corner-to-corner sample positions over the inclusive range `[lo, hi]`.
pub fn axis_positions(lo: usize, hi: usize, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            if count <= 1 || lo == hi {
                lo as f64
            } else {
                lo as f64 + i as f64 * (hi - lo) as f64 / (count - 1) as f64
            }
        })
        .collect()
}

fn sample_trilinear(vol: &Volume, p: [f64; 3]) -> f64 {
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    let mut frac = [0f64; 3];
    for a in 0..3 {
        let max = vol.dims[a] - 1;
        let clamped = p[a].clamp(0.0, max as f64);
        let fl = clamped.floor();
        lo[a] = fl as usize;
        hi[a] = (lo[a] + 1).min(max);
        frac[a] = clamped - fl;
    }
    let mut acc = 0.0f64;
    for (x, wx) in [(lo[0], 1.0 - frac[0]), (hi[0], frac[0])] {
        for (y, wy) in [(lo[1], 1.0 - frac[1]), (hi[1], frac[1])] {
            for (z, wz) in [(lo[2], 1.0 - frac[2]), (hi[2], frac[2])] {
                let w = wx * wy * wz;
                if w != 0.0 {
                    acc += w * vol.value_at(x, y, z);
                }
            }
        }
    }
    acc
}

fn sample_nearest(vol: &Volume, p: [f64; 3]) -> f64 {
    let mut q = [0usize; 3];
    for a in 0..3 {
        let max = vol.dims[a] - 1;
        q[a] = (p[a] + 0.5).floor().clamp(0.0, max as f64) as usize;
    }
    vol.value_at(q[0], q[1], q[2])
}

fn grown_box(b: &Box3, offset: usize, dims: [usize; 3]) -> Result<Box3> {
    if !b.fits_within(dims) {
        return Err(VolError::DegenerateBox(format!(
            "box {:?}..{:?} outside volume dims {:?}",
            b.min, b.max, dims
        )));
    }
    Ok(b.grow_clip(offset, dims))
}

/// Resamples one volume over the grown box to `out_dims`, returned in network
/// memory order (x, then y, then z, z fastest).
pub fn crop_resize_volume(
    vol: &Volume,
    b: &Box3,
    offset: usize,
    out_dims: [usize; 3],
    mode: ResampleMode,
) -> Result<Vec<f64>> {
    if out_dims.iter().any(|&d| d == 0) {
        return Err(VolError::DegenerateBox(format!(
            "output dims {:?} contain zero",
            out_dims
        )));
    }
    let g = grown_box(b, offset, vol.dims)?;
    let xs = axis_positions(g.min[0], g.max[0], out_dims[0]);
    let ys = axis_positions(g.min[1], g.max[1], out_dims[1]);
    let zs = axis_positions(g.min[2], g.max[2], out_dims[2]);
    let mut out = Vec::with_capacity(out_dims[0] * out_dims[1] * out_dims[2]);
    for &px in &xs {
        for &py in &ys {
            for &pz in &zs {
                let p = [px, py, pz];
                out.push(match mode {
                    ResampleMode::Trilinear => sample_trilinear(vol, p),
                    ResampleMode::Nearest => sample_nearest(vol, p),
                });
            }
        }
    }
    Ok(out)
}

/// Resamples all four modalities over the grown box into a `(4, W, H, D)`
/// tensor, channels in canonical modality order.
pub fn crop_resize(
    scan: &MultiModalScan,
    b: &Box3,
    offset: usize,
    out_dims: [usize; 3],
    mode: ResampleMode,
) -> Result<Tensor<f32>> {
    let mut data = Vec::with_capacity(4 * out_dims[0] * out_dims[1] * out_dims[2]);
    for vol in &scan.modalities {
        let channel = crop_resize_volume(vol, b, offset, out_dims, mode)?;
        data.extend(channel.into_iter().map(|v| v as f32));
    }
    Tensor::from_vec(&[4, out_dims[0], out_dims[1], out_dims[2]], data)
        .map_err(|e| VolError::InvalidVolume(e.to_string()))
}

/// Nearest-voxel label resample over the grown box, in the same memory order
/// as [`crop_resize`] channels.
pub fn crop_resize_labels(
    labels: &Volume,
    b: &Box3,
    offset: usize,
    out_dims: [usize; 3],
) -> Result<Vec<u8>> {
    let vals = crop_resize_volume(labels, b, offset, out_dims, ResampleMode::Nearest)?;
    Ok(vals.into_iter().map(|v| v as u8).collect())
}
