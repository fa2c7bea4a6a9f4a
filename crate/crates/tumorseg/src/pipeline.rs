use autonet::Tensor;
use ctxwin::{
    assign_proposal_labels, enumerate_windows, negative_windows, positive_windows, resize_slice,
    LabeledProposal, OracleSource, ProposalSource, Rect, SliceContext, Window,
};
use segarch::{anchor_targets, z_score_per_channel, Detector, DetectorSample};
use volcore::Volume;

use crate::config::RunConfig;
use crate::errors::{CliError, Result};

/// Windows and labeled proposals generated for one slice at one pyramid
/// scale, together with the scaled image they were generated over.
pub struct SliceWindowSet {
    pub scale_id: usize,
    pub slice_z: usize,
    pub scaled_dims: (usize, usize),
    pub image: Vec<f32>,
    pub windows: Vec<Window>,
    pub labeled: Vec<LabeledProposal>,
}

/// Looks up a proposal source by name. The oracle needs only a seed; the
/// detector variant wraps a trained network.
pub fn resolve_source<'a>(
    name: &str,
    seed: u64,
    det: Option<&'a Detector<f32>>,
) -> Result<Box<dyn ProposalSource + 'a>> {
    match name {
        "oracle" => Ok(Box::new(OracleSource { seed })),
        "detector" => {
            let det = det.ok_or_else(|| {
                CliError::Usage("proposal source 'detector' needs --det-ckpt".into())
            })?;
            Ok(Box::new(segarch::DetectorSource::new(det).map_err(CliError::from)?))
        }
        other => Err(CliError::Usage(format!(
            "unknown proposal source '{other}' (known: oracle, detector)"
        ))),
    }
}

/// Tight box around the nonzero label pixels of each axial slice, indexed by
/// z; None where the slice holds no tumor.
pub fn slice_gt_boxes(labels: &Volume) -> Result<Vec<Option<Rect>>> {
    let [nx, ny, nz] = labels.dims;
    let mut out = Vec::with_capacity(nz);
    for z in 0..nz {
        let plane = labels.axial_slice(z)?;
        let (mut x0, mut y0, mut x1, mut y1) = (nx, ny, 0usize, 0usize);
        let mut any = false;
        for y in 0..ny {
            for x in 0..nx {
                if plane[x + nx * y] != 0.0 {
                    any = true;
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        if any {
            out.push(Some(
                Rect::new(x0 as i64, y0 as i64, x1 as i64, y1 as i64).map_err(CliError::from)?,
            ));
        } else {
            out.push(None);
        }
    }
    Ok(out)
}

/// Runs the window pipeline over every axial slice of one scan at every
/// configured scale: resize, propose, pick positive and negative windows,
/// then label the proposals against them. Scales whose image is smaller than
/// the window are skipped and reported through `skipped_scales`.
pub fn build_window_sets(
    flair: &Volume,
    labels: &Volume,
    cfg: &RunConfig,
    source: &dyn ProposalSource,
    skipped_scales: &mut Vec<usize>,
) -> Result<Vec<SliceWindowSet>> {
    let [nx, ny, nz] = flair.dims;
    let specs = cfg.scale_specs((nx, ny))?;
    let gt_by_slice = slice_gt_boxes(labels)?;
    let (k1, k2) = cfg.window_size;
    let mut sets = Vec::new();
    for spec in &specs {
        let (sw, sh) = spec.scaled_dims;
        if k1 > sw || k2 > sh {
            if !skipped_scales.contains(&spec.scale_id) {
                skipped_scales.push(spec.scale_id);
            }
            continue;
        }
        let grid = enumerate_windows(spec.scaled_dims, cfg.window_size, cfg.k_stride)?;
        for z in 0..nz {
            let plane = flair.axial_slice(z)?;
            let image = resize_slice(&plane, (nx, ny), spec.scaled_dims);
            let gt_scaled: Vec<Rect> = gt_by_slice[z]
                .iter()
                .filter_map(|r| spec.to_scaled(r))
                .collect();
            let ctx = SliceContext {
                scale_id: spec.scale_id,
                slice_z: z,
                scaled_dims: spec.scaled_dims,
                image: &image,
                gt_boxes: &gt_scaled,
            };
            let proposals = source.propose(&ctx, cfg.proposals_per_window);
            let positives = positive_windows(&gt_scaled, spec.scaled_dims, spec.scale_id);
            let negatives = negative_windows(
                &proposals,
                &positives,
                &grid,
                cfg.min_proposals,
                spec.scale_id,
            );
            let mut windows = positives;
            windows.extend(negatives);
            let labeled = assign_proposal_labels(&proposals, &gt_scaled, cfg.iou_threshold, &windows);
            sets.push(SliceWindowSet {
                scale_id: spec.scale_id,
                slice_z: z,
                scaled_dims: spec.scaled_dims,
                image,
                windows,
                labeled,
            });
        }
    }
    Ok(sets)
}

/// Turns one window set into a detector training sample: the scaled slice as
/// a z-scored (1, 1, W, H, 1) tensor plus its anchored targets.
pub fn detector_sample(
    set: &SliceWindowSet,
    det_cfg: &segarch::DetectorConfig,
) -> Result<DetectorSample> {
    let (w, h) = set.scaled_dims;
    let mut data = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            data[x * h + y] = set.image[x + w * y];
        }
    }
    let mut plane = Tensor::from_vec(&[1, w, h, 1], data).map_err(CliError::from)?;
    z_score_per_channel(&mut plane);
    let slice = plane
        .reshape(&[1, 1, w, h, 1])
        .map_err(CliError::from)?;
    let targets = anchor_targets(det_cfg, &set.labeled, set.scaled_dims);
    Ok(DetectorSample { slice, targets })
}
