//! Training loops: soft-dice descent for the segmentation network and
//! classification-plus-regression descent for the slice detector.

use std::time::Instant;

use autonet::concat::{concat_channels, split_channels};
use autonet::loss::{soft_dice_loss, softmax_channels, softmax_channels_backward, DICE_EPS};
use autonet::optim::Sgd;
use autonet::{Element, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{DetectorConfig, SegNetConfig};
use crate::detector::{detector_loss, Detector, DetGrads};
use crate::detector::AnchoredTarget;
use crate::error::{ArchError, Result};
use crate::layers::ConvLayer;
use crate::segnet::{region_probs, region_probs_backward, SegGrads, SegNet};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainOpts {
    pub lr: f64,
    pub momentum: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Smoothing term in the soft dice denominator and numerator.
    pub eps: f64,
}

impl Default for TrainOpts {
    fn default() -> Self {
        TrainOpts {
            lr: 0.01,
            momentum: 0.9,
            iterations: 300,
            seed: 0,
            eps: DICE_EPS,
        }
    }
}

/// One segmentation training example: a z-scored multi-modal patch
/// (channels, W, H, D) and its three region masks (3, W, H, D) as 0/1.
pub struct SegSample {
    pub patch: Tensor<f32>,
    pub masks: Tensor<f32>,
}

/// One detector training example: a slice tensor (1, C, W, H, 1) plus the
/// anchored targets its labeled proposals produced.
pub struct DetectorSample {
    pub slice: Tensor<f32>,
    pub targets: Vec<AnchoredTarget>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_curve: Vec<f64>,
    /// Hard dice per region (WT, TC, ET) on the training set; segmentation only.
    pub train_dice: Option<[f64; 3]>,
    pub val_dice: Option<[f64; 3]>,
    /// Objectness classification accuracy; detector only.
    pub train_accuracy: Option<f64>,
    /// Not serialized: keeps persisted reports byte-identical across reruns.
    #[serde(skip)]
    pub wall_clock_secs: f64,
    pub seed: u64,
}

/// Standardize each leading-dimension channel of a patch to zero mean and
/// unit variance (constant channels stay at zero).
pub fn z_score_per_channel(patch: &mut Tensor<f32>) {
    let channels = patch.shape()[0];
    let stride = patch.len() / channels;
    for c in 0..channels {
        let slab = &mut patch.data_mut()[c * stride..(c + 1) * stride];
        let mean = slab.iter().map(|&v| v as f64).sum::<f64>() / stride as f64;
        let var = slab
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / stride as f64;
        let std = var.sqrt().max(1e-6);
        for v in slab {
            *v = ((*v as f64 - mean) / std) as f32;
        }
    }
}

/// Mean soft dice loss over the three region probability maps, with its
/// gradient with respect to the stacked region tensor.
pub fn region_dice_loss<T: Element>(
    regions: &Tensor<T>,
    masks: &Tensor<T>,
    eps: f64,
) -> Result<(f64, Tensor<T>)> {
    let parts = split_channels(regions, &[1, 1, 1])?;
    let targets = split_channels(masks, &[1, 1, 1])?;
    let mut value = 0.0f64;
    let mut grads = Vec::with_capacity(3);
    let third = T::from_f64(1.0 / 3.0);
    for (p, t) in parts.iter().zip(&targets) {
        let loss = soft_dice_loss(p, t, eps)?;
        value += loss.value / 3.0;
        grads.push(loss.gradient.map(|g| g * third));
    }
    let grad_refs: Vec<&Tensor<T>> = grads.iter().collect();
    Ok((value, concat_channels(&grad_refs)?))
}

fn check_seg_samples(samples: &[SegSample], cfg: &SegNetConfig, role: &str) -> Result<()> {
    let [w, h, d] = cfg.patch_dims;
    for s in samples {
        if s.patch.shape() != [cfg.in_channels, w, h, d] {
            return Err(ArchError::ConfigInvalid(format!(
                "{role} patch shape {:?} does not match configured ({}, {w}, {h}, {d})",
                s.patch.shape(),
                cfg.in_channels
            )));
        }
        if s.masks.shape() != [3, w, h, d] {
            return Err(ArchError::ConfigInvalid(format!(
                "{role} mask shape {:?} does not match (3, {w}, {h}, {d})",
                s.masks.shape()
            )));
        }
    }
    Ok(())
}

fn assemble_batch(
    samples: &[SegSample],
    picks: &[usize],
    cfg: &SegNetConfig,
) -> (Tensor<f32>, Tensor<f32>) {
    let [w, h, d] = cfg.patch_dims;
    let mut patches = Tensor::zeros(&[picks.len(), cfg.in_channels, w, h, d]);
    let mut masks = Tensor::zeros(&[picks.len(), 3, w, h, d]);
    let p_len = cfg.in_channels * w * h * d;
    let m_len = 3 * w * h * d;
    for (slot, &i) in picks.iter().enumerate() {
        patches.data_mut()[slot * p_len..(slot + 1) * p_len]
            .copy_from_slice(samples[i].patch.data());
        masks.data_mut()[slot * m_len..(slot + 1) * m_len]
            .copy_from_slice(samples[i].masks.data());
    }
    (patches, masks)
}

fn zero_velocity<T: Element>(layers: &[&ConvLayer<T>]) -> Vec<Vec<T>> {
    layers
        .iter()
        .flat_map(|l| [vec![T::default(); l.weight.len()], vec![T::default(); l.bias.len()]])
        .collect()
}

fn step_layers<T: Element>(
    sgd: &Sgd,
    layers: Vec<&mut ConvLayer<T>>,
    flat_grads: &[&Tensor<T>],
    velocity: &mut [Vec<T>],
) -> Result<()> {
    for (i, layer) in layers.into_iter().enumerate() {
        sgd.step(layer.weight.data_mut(), flat_grads[2 * i].data(), &mut velocity[2 * i])?;
        sgd.step(
            layer.bias.data_mut(),
            flat_grads[2 * i + 1].data(),
            &mut velocity[2 * i + 1],
        )?;
    }
    Ok(())
}

/// Aggregate hard dice per region over a sample set: region probabilities
/// thresholded at 0.5, global overlap counts, both-empty scored as 1.
pub fn hard_region_dice(net: &SegNet<f32>, samples: &[SegSample]) -> Result<[f64; 3]> {
    let mut inter = [0u64; 3];
    let mut pred = [0u64; 3];
    let mut truth = [0u64; 3];
    for s in samples {
        let mut shape = vec![1];
        shape.extend_from_slice(s.patch.shape());
        let input = s.patch.clone().reshape(&shape)?;
        let (logits, _) = net.forward(&input)?;
        let probs = softmax_channels(&logits)?;
        let regions = region_probs(&probs)?;
        let stride = regions.len() / 3;
        for r in 0..3 {
            let p = &regions.data()[r * stride..(r + 1) * stride];
            let t = &s.masks.data()[r * stride..(r + 1) * stride];
            for (&pv, &tv) in p.iter().zip(t) {
                let pb = pv >= 0.5;
                let tb = tv >= 0.5;
                inter[r] += (pb && tb) as u64;
                pred[r] += pb as u64;
                truth[r] += tb as u64;
            }
        }
    }
    let mut dice = [1.0f64; 3];
    for r in 0..3 {
        let den = pred[r] + truth[r];
        if den > 0 {
            dice[r] = 2.0 * inter[r] as f64 / den as f64;
        }
    }
    Ok(dice)
}

pub fn train_seg(
    train: &[SegSample],
    val: &[SegSample],
    cfg: &SegNetConfig,
    opts: &TrainOpts,
) -> Result<(SegNet<f32>, TrainReport)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(ArchError::EmptyDataset("segmentation training set".into()));
    }
    check_seg_samples(train, cfg, "train")?;
    check_seg_samples(val, cfg, "val")?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut net = SegNet::<f32>::build(cfg, opts.seed)?;
    let sgd = Sgd::new(opts.lr, opts.momentum);
    let mut velocity = zero_velocity(&net.layers());
    let batch = cfg.batch.min(train.len());
    let mut curve = Vec::with_capacity(opts.iterations);
    for _ in 0..opts.iterations {
        let picks: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..train.len())).collect();
        let (patches, masks) = assemble_batch(train, &picks, cfg);
        let (logits, trace) = net.forward(&patches)?;
        let probs = softmax_channels(&logits)?;
        let regions = region_probs(&probs)?;
        let (loss, grad_regions) = region_dice_loss(&regions, &masks, opts.eps)?;
        let grad_probs = region_probs_backward(&grad_regions, probs.shape())?;
        let grad_logits = softmax_channels_backward(&grad_probs, &probs)?;
        let grads: SegGrads<f32> = net.backward(&trace, &grad_logits)?;
        let flat = grads.flat();
        step_layers(&sgd, net.layers_mut(), &flat, &mut velocity)?;
        curve.push(loss);
    }
    let train_dice = hard_region_dice(&net, train)?;
    let val_dice = if val.is_empty() {
        None
    } else {
        Some(hard_region_dice(&net, val)?)
    };
    let report = TrainReport {
        loss_curve: curve,
        train_dice: Some(train_dice),
        val_dice,
        train_accuracy: None,
        wall_clock_secs: start.elapsed().as_secs_f64(),
        seed: opts.seed,
    };
    Ok((net, report))
}

/// Fraction of anchored targets whose objectness crosses 0.5 on the right side.
pub fn detector_accuracy(det: &Detector<f32>, samples: &[&DetectorSample]) -> Result<f64> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for s in samples {
        let (map, _) = det.forward(&s.slice)?;
        let scores = det.objectness(&map)?;
        let h = s.slice.shape()[3];
        for t in &s.targets {
            let score = scores[t.anchor][t.x * h + t.y];
            correct += ((score >= 0.5) == t.positive) as usize;
            total += 1;
        }
    }
    if total == 0 {
        return Err(ArchError::EmptyDataset("no anchored targets to score".into()));
    }
    Ok(correct as f64 / total as f64)
}

pub fn train_detector(
    samples: &[DetectorSample],
    cfg: &DetectorConfig,
    opts: &TrainOpts,
) -> Result<(Detector<f32>, TrainReport)> {
    cfg.validate()?;
    let usable: Vec<&DetectorSample> = samples.iter().filter(|s| !s.targets.is_empty()).collect();
    if usable.is_empty() {
        return Err(ArchError::EmptyDataset(
            "no detector slices with anchored targets".into(),
        ));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut det = Detector::<f32>::build(cfg, opts.seed)?;
    let sgd = Sgd::new(opts.lr, opts.momentum);
    let mut velocity = zero_velocity(&det.layers());
    let mut curve = Vec::with_capacity(opts.iterations);
    for _ in 0..opts.iterations {
        let s = usable[rng.gen_range(0..usable.len())];
        let (map, trace) = det.forward(&s.slice)?;
        let (loss, grad_map) = detector_loss(&map, &s.targets)?;
        let grads: DetGrads<f32> = det.backward(&trace, &grad_map)?;
        let flat = grads.flat();
        step_layers(&sgd, det.layers_mut(), &flat, &mut velocity)?;
        curve.push(loss);
    }
    let accuracy = detector_accuracy(&det, &usable)?;
    let report = TrainReport {
        loss_curve: curve,
        train_dice: None,
        val_dice: None,
        train_accuracy: Some(accuracy),
        wall_clock_secs: start.elapsed().as_secs_f64(),
        seed: opts.seed,
    };
    Ok((det, report))
}
