//! Cascade inference: per-slice detection, 3D aggregation, crop-and-resize,
//! segmentation, nesting repair, and paste-back at native resolution.

use autonet::loss::softmax_channels;
use autonet::Tensor;
use ctxwin::{aggregate_detections, Rect};
use volcore::{crop_resize, Box3, MultiModalScan, ResampleMode, Volume, VoxelData};

use crate::config::CascadeConfig;
use crate::detector::Detector;
use crate::error::Result;
use crate::segnet::{region_probs, SegNet};
use crate::train::z_score_per_channel;

/// Resolve one voxel's label from its region probabilities, most specific
/// region first so the predicted regions always nest.
pub fn repair_label(wt: f64, tc: f64, et: f64) -> u8 {
    if et >= 0.5 {
        4
    } else if tc >= 0.5 {
        1
    } else if wt >= 0.5 {
        2
    } else {
        0
    }
}

/// Stack a scan's axial slice at `z` into a detector input (1, C, W, H, 1),
/// z-scored per channel. One channel reads FLAIR alone; four stack all
/// modalities in canonical order.
pub fn slice_tensor(scan: &MultiModalScan, z: usize, in_channels: usize) -> Result<Tensor<f32>> {
    let [nx, ny, _] = scan.modalities[0].dims;
    let mut data = vec![0.0f32; in_channels * nx * ny];
    for c in 0..in_channels {
        let plane = scan.modalities[c].axial_slice(z)?;
        for y in 0..ny {
            for x in 0..nx {
                data[c * nx * ny + x * ny + y] = plane[x + nx * y];
            }
        }
    }
    let mut t = Tensor::from_vec(&[in_channels, nx, ny, 1], data)?;
    z_score_per_channel(&mut t);
    Ok(t.reshape(&[1, in_channels, nx, ny, 1])?)
}

/// Best detector box per axial slice, in native pixel coordinates.
pub fn detect_slices(
    det: &Detector<f32>,
    scan: &MultiModalScan,
) -> Result<Vec<(usize, Rect, f64)>> {
    let [nx, ny, nz] = scan.modalities[0].dims;
    let mut out = Vec::new();
    for z in 0..nz {
        let input = slice_tensor(scan, z, det.cfg.in_channels)?;
        let (map, _) = det.forward(&input)?;
        if let Some(&(rect, score)) = det.decode_boxes(&map, (nx, ny), 1)?.first() {
            out.push((z, rect, score));
        }
    }
    Ok(out)
}

/// Perfect-knowledge detections straight from a label volume: the bounding
/// rect of each slice's nonzero voxels, scored 1. Useful for exercising the
/// cascade without a trained detector.
pub fn oracle_slice_boxes(labels: &Volume) -> Vec<(usize, Rect, f64)> {
    let [nx, ny, nz] = labels.dims;
    let mut out = Vec::new();
    for z in 0..nz {
        let (mut x0, mut y0, mut x1, mut y1) = (nx, ny, 0usize, 0usize);
        let mut any = false;
        for y in 0..ny {
            for x in 0..nx {
                if labels.value_at(x, y, z) != 0.0 {
                    any = true;
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        if any {
            let rect = Rect::new(x0 as i64, y0 as i64, x1 as i64, y1 as i64)
                .expect("min/max scan keeps corners ordered");
            out.push((z, rect, 1.0));
        }
    }
    out
}

pub struct CascadeOutcome {
    pub labels: Volume,
    /// The aggregated (ungrown) detection box the segmentation ran over.
    pub detection_box: Box3,
    /// True when no detection cleared the floor and the whole volume was used.
    pub used_fallback: bool,
}

fn nearest_index(v: usize, lo: usize, hi: usize, count: usize) -> usize {
    if hi == lo || count <= 1 {
        return 0;
    }
    let u = (v - lo) as f64 * (count - 1) as f64 / (hi - lo) as f64;
    ((u + 0.5).floor() as usize).min(count - 1)
}

/// Run the segmentation half of the cascade over pre-computed per-slice
/// detections. Voxels outside the grown detection box stay background.
pub fn infer_cascade(
    scan: &MultiModalScan,
    slice_boxes: &[(usize, Rect, f64)],
    net: &SegNet<f32>,
    cfg: &CascadeConfig,
) -> Result<CascadeOutcome> {
    let dims = scan.modalities[0].dims;
    let (detection_box, used_fallback) = match aggregate_detections(slice_boxes, cfg.score_floor)
    {
        Some(b) => {
            let max = [
                b.max[0].min(dims[0] - 1),
                b.max[1].min(dims[1] - 1),
                b.max[2].min(dims[2] - 1),
            ];
            (
                Box3::new(b.min, max).expect("clamping cannot invert an ordered box"),
                false,
            )
        }
        None => (
            Box3::new([0; 3], [dims[0] - 1, dims[1] - 1, dims[2] - 1])
                .expect("volume dims are nonzero"),
            true,
        ),
    };

    let out_dims = cfg.infer_patch_dims;
    let mut crop = crop_resize(
        scan,
        &detection_box,
        cfg.f_offset,
        out_dims,
        ResampleMode::Trilinear,
    )?;
    z_score_per_channel(&mut crop);
    let mut shape = vec![1];
    shape.extend_from_slice(crop.shape());
    let input = crop.reshape(&shape)?;
    let logits = net.infer(&input)?;
    let probs = softmax_channels(&logits)?;
    let regions = region_probs(&probs)?;

    let [w, h, d] = out_dims;
    let stride = w * h * d;
    let rdata = regions.data();
    let mut crop_labels = vec![0u8; stride];
    for (i, label) in crop_labels.iter_mut().enumerate() {
        *label = repair_label(
            rdata[i] as f64,
            rdata[stride + i] as f64,
            rdata[2 * stride + i] as f64,
        );
    }

    let grown = detection_box.grow_clip(cfg.f_offset, dims);
    let mut out = vec![0u8; dims[0] * dims[1] * dims[2]];
    for z in grown.min[2]..=grown.max[2] {
        let kz = nearest_index(z, grown.min[2], grown.max[2], d);
        for y in grown.min[1]..=grown.max[1] {
            let ky = nearest_index(y, grown.min[1], grown.max[1], h);
            for x in grown.min[0]..=grown.max[0] {
                let kx = nearest_index(x, grown.min[0], grown.max[0], w);
                out[x + dims[0] * (y + dims[1] * z)] = crop_labels[kx * h * d + ky * d + kz];
            }
        }
    }
    let labels = Volume {
        dims,
        spacing: scan.modalities[0].spacing,
        data: VoxelData::U8(out),
    };
    Ok(CascadeOutcome {
        labels,
        detection_box,
        used_fallback,
    })
}
