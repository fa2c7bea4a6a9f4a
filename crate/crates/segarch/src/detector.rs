//! Slice detector: a dense stride-1 2D trunk whose head assigns each anchor
//! five values — an objectness score (carried as a two-logit softmax pair)
//! and four box deltas — at every pixel of a scaled axial slice.

use std::path::Path;

use autonet::checkpoint::{load_checkpoint, save_checkpoint};
use autonet::loss::{cross_entropy_logits, smooth_l1};
use autonet::{ConvSpec, Element, Tensor, TensorError};
use ctxwin::{decode_deltas, encode_deltas, LabeledProposal, PropLabel, Proposal, Rect};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::DetectorConfig;
use crate::error::{ArchError, Result};
use crate::layers::{ConvLayer, LayerGrads, LayerTrace};

pub struct Detector<T: Element> {
    pub cfg: DetectorConfig,
    pub trunk: Vec<ConvLayer<T>>,
    pub head: ConvLayer<T>,
}

pub struct DetTrace<T: Element> {
    trunk_t: Vec<LayerTrace<T>>,
    head_t: LayerTrace<T>,
}

pub struct DetGrads<T: Element> {
    pub trunk: Vec<LayerGrads<T>>,
    pub head: LayerGrads<T>,
}

impl<T: Element> DetGrads<T> {
    pub fn flat(&self) -> Vec<&Tensor<T>> {
        let mut out = Vec::new();
        for g in self.trunk.iter().chain(std::iter::once(&self.head)) {
            out.push(&g.weight);
            out.push(&g.bias);
        }
        out
    }
}

/// The square box a given anchor size hangs on a pixel.
pub fn anchor_rect(x: usize, y: usize, size: usize) -> Rect {
    let x0 = x as i64 - (size as i64 - 1) / 2;
    let y0 = y as i64 - (size as i64 - 1) / 2;
    Rect {
        x0,
        y0,
        x1: x0 + size as i64 - 1,
        y1: y0 + size as i64 - 1,
    }
}

/// One supervised map location: which anchor map cell a labeled proposal
/// lands on, and what it should say.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchoredTarget {
    pub anchor: usize,
    pub x: usize,
    pub y: usize,
    pub positive: bool,
    /// Deltas re-encoded against the anchor box; present iff positive.
    pub deltas: Option<[f64; 4]>,
}

/// Snap labeled proposals onto anchor map cells: position is the rounded
/// proposal center, anchor the closest size to the proposal's mean extent.
/// Regression targets are re-encoded from the proposal's matched
/// ground-truth box onto the anchor box.
pub fn anchor_targets(
    cfg: &DetectorConfig,
    labeled: &[LabeledProposal],
    dims: (usize, usize),
) -> Vec<AnchoredTarget> {
    labeled
        .iter()
        .filter_map(|lp| {
            let (cx, cy) = lp.proposal.rect.center();
            let x = (cx + 0.5).floor() as i64;
            let y = (cy + 0.5).floor() as i64;
            if x < 0 || y < 0 || x as usize >= dims.0 || y as usize >= dims.1 {
                return None;
            }
            let extent = (lp.proposal.rect.width() as f64 * lp.proposal.rect.height() as f64)
                .sqrt();
            let anchor = cfg
                .anchor_sizes
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (**a as f64 - extent)
                        .abs()
                        .partial_cmp(&(**b as f64 - extent).abs())
                        .unwrap()
                })
                .map(|(i, _)| i)
                .expect("validated nonempty anchor list");
            let positive = lp.label == PropLabel::Positive;
            let deltas = lp.regression_target.map(|t| {
                let gt = decode_deltas(&lp.proposal.rect, t);
                encode_deltas(&anchor_rect(x as usize, y as usize, cfg.anchor_sizes[anchor]), &gt)
            });
            Some(AnchoredTarget {
                anchor,
                x: x as usize,
                y: y as usize,
                positive,
                deltas: if positive { deltas } else { None },
            })
        })
        .collect()
}

impl<T: Element> Detector<T> {
    pub fn build(cfg: &DetectorConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [t0, t1] = cfg.trunk_channels;
        let trunk = vec![
            ConvLayer::init(
                "trunk.0",
                ConvSpec::same(cfg.in_channels, t0, [3, 3, 1], 1),
                &mut rng,
            )?,
            ConvLayer::init("trunk.1", ConvSpec::same(t0, t1, [3, 3, 1], 1), &mut rng)?,
        ];
        let head = ConvLayer::init(
            "head",
            ConvSpec::same(t1, cfg.head_channels(), [1, 1, 1], 1),
            &mut rng,
        )?;
        Ok(Detector {
            cfg: cfg.clone(),
            trunk,
            head,
        })
    }

    pub fn layers(&self) -> Vec<&ConvLayer<T>> {
        self.trunk
            .iter()
            .chain(std::iter::once(&self.head))
            .collect()
    }

    pub fn layers_mut(&mut self) -> Vec<&mut ConvLayer<T>> {
        self.trunk
            .iter_mut()
            .chain(std::iter::once(&mut self.head))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|l| l.param_count()).sum()
    }

    /// Anchor maps for a slice tensor (1, C, W, H, 1): output
    /// (1, anchors x 6, W, H, 1).
    pub fn forward(&self, slice: &Tensor<T>) -> Result<(Tensor<T>, DetTrace<T>)> {
        let s = slice.shape();
        if s.len() != 5 || s[1] != self.cfg.in_channels || s[4] != 1 {
            return Err(ArchError::Tensor(TensorError::ShapeMismatch(format!(
                "expected (N, {}, W, H, 1) slice, got {s:?}",
                self.cfg.in_channels
            ))));
        }
        let mut x = slice.clone();
        let mut trunk_t = Vec::with_capacity(self.trunk.len());
        for layer in &self.trunk {
            let (y, t) = layer.forward(&x, 0, true)?;
            trunk_t.push(t);
            x = y;
        }
        let (map, head_t) = self.head.forward(&x, 0, false)?;
        Ok((map, DetTrace { trunk_t, head_t }))
    }

    pub fn backward(&self, trace: &DetTrace<T>, grad_map: &Tensor<T>) -> Result<DetGrads<T>> {
        let (mut grad, head_g) = self.head.backward(&trace.head_t, grad_map, false)?;
        let mut trunk_g: Vec<Option<LayerGrads<T>>> =
            (0..self.trunk.len()).map(|_| None).collect();
        for i in (0..self.trunk.len()).rev() {
            let (g_in, g_params) = self.trunk[i].backward(&trace.trunk_t[i], &grad, true)?;
            trunk_g[i] = Some(g_params);
            grad = g_in;
        }
        Ok(DetGrads {
            trunk: trunk_g.into_iter().map(|g| g.unwrap()).collect(),
            head: head_g,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f32_params: Vec<(String, Tensor<f32>)> = self
            .layers()
            .iter()
            .flat_map(|l| {
                [
                    (format!("{}.weight", l.name), l.weight.cast::<f32>()),
                    (format!("{}.bias", l.name), l.bias.cast::<f32>()),
                ]
            })
            .collect();
        let refs: Vec<(String, &Tensor<f32>)> =
            f32_params.iter().map(|(n, t)| (n.clone(), t)).collect();
        save_checkpoint(path, &refs)?;
        Ok(())
    }

    pub fn load(cfg: &DetectorConfig, path: &Path) -> Result<Self> {
        let mut net = Detector::<T>::build(cfg, 0)?;
        let stored = load_checkpoint(path)?;
        let mut by_name: std::collections::HashMap<String, Tensor<f32>> =
            stored.into_iter().collect();
        for layer in net.layers_mut() {
            for (suffix, param) in [("weight", &mut layer.weight), ("bias", &mut layer.bias)] {
                let key = format!("{}.{}", layer.name, suffix);
                let got = by_name.remove(&key).ok_or_else(|| {
                    ArchError::Tensor(TensorError::ParamMismatch {
                        name: key.clone(),
                        reason: "missing from checkpoint".into(),
                    })
                })?;
                if got.shape() != param.shape() {
                    return Err(ArchError::Tensor(TensorError::ParamMismatch {
                        name: key,
                        reason: format!("shape {:?} vs expected {:?}", got.shape(), param.shape()),
                    }));
                }
                *param = got.cast::<T>();
            }
        }
        if let Some(extra) = by_name.keys().next() {
            return Err(ArchError::Tensor(TensorError::ParamMismatch {
                name: extra.clone(),
                reason: "checkpoint parameter unknown to this configuration".into(),
            }));
        }
        Ok(net)
    }

    /// Objectness probability maps: (anchors, W, H), softmax over each pair.
    pub fn objectness(&self, map: &Tensor<T>) -> Result<Vec<Vec<f64>>> {
        let s = map.shape();
        let (w, h) = (s[2], s[3]);
        let anchors = self.cfg.anchor_sizes.len();
        let mut out = vec![vec![0.0f64; w * h]; anchors];
        let data = map.data();
        let plane = w * h; // z extent is 1
        for a in 0..anchors {
            let z0_base = (a * 6) * plane;
            let z1_base = (a * 6 + 1) * plane;
            for i in 0..plane {
                let z0 = data[z0_base + i].to_f64s();
                let z1 = data[z1_base + i].to_f64s();
                let m = z0.max(z1);
                let e0 = (z0 - m).exp();
                let e1 = (z1 - m).exp();
                out[a][i] = e1 / (e0 + e1);
            }
        }
        Ok(out)
    }

    /// Decode the map into scored boxes, best first (score desc, then anchor
    /// and raster position for determinism), clipped to the slice.
    pub fn decode_boxes(
        &self,
        map: &Tensor<T>,
        dims: (usize, usize),
        limit: usize,
    ) -> Result<Vec<(Rect, f64)>> {
        let s = map.shape();
        let (w, h) = (s[2], s[3]);
        let scores = self.objectness(map)?;
        let data = map.data();
        let plane = w * h;
        let mut order: Vec<(usize, usize)> = (0..self.cfg.anchor_sizes.len())
            .flat_map(|a| (0..plane).map(move |i| (a, i)))
            .collect();
        order.sort_by(|&(a1, i1), &(a2, i2)| {
            scores[a2][i2]
                .partial_cmp(&scores[a1][i1])
                .unwrap()
                .then(a1.cmp(&a2))
                .then(i1.cmp(&i2))
        });
        let mut out = Vec::new();
        for (a, i) in order.into_iter().take(limit) {
            let (x, y) = (i / h, i % h);
            let base = anchor_rect(x, y, self.cfg.anchor_sizes[a]);
            let deltas = [
                data[(a * 6 + 2) * plane + i].to_f64s(),
                data[(a * 6 + 3) * plane + i].to_f64s(),
                data[(a * 6 + 4) * plane + i].to_f64s(),
                data[(a * 6 + 5) * plane + i].to_f64s(),
            ];
            if let Some(rect) = decode_deltas(&base, deltas).clip(dims.0, dims.1) {
                out.push((rect, scores[a][i]));
            }
        }
        Ok(out)
    }
}

/// Classification plus positive-only box regression over the anchored
/// targets; returns the mean loss and the gradient with respect to the map.
pub fn detector_loss<T: Element>(
    map: &Tensor<T>,
    targets: &[AnchoredTarget],
) -> Result<(f64, Tensor<T>)> {
    if targets.is_empty() {
        return Err(ArchError::EmptyDataset("no anchored targets".into()));
    }
    let s = map.shape();
    let (w, h) = (s[2], s[3]);
    let plane = w * h;
    let data = map.data();
    let mut grad = Tensor::zeros(s);
    let mut total = 0.0f64;
    let scale = 1.0 / targets.len() as f64;
    for t in targets {
        let i = t.x * h + t.y;
        let base = t.anchor * 6;
        let logits = [data[base * plane + i], data[(base + 1) * plane + i]];
        let (ce, ce_grad) = cross_entropy_logits(&logits, usize::from(t.positive))?;
        total += ce * scale;
        let g = grad.data_mut();
        g[base * plane + i] = g[base * plane + i] + ce_grad[0] * T::from_f64(scale);
        g[(base + 1) * plane + i] = g[(base + 1) * plane + i] + ce_grad[1] * T::from_f64(scale);
        if let Some(target_deltas) = t.deltas {
            let pred: Vec<T> = (0..4).map(|k| data[(base + 2 + k) * plane + i]).collect();
            let tgt: Vec<T> = target_deltas.iter().map(|&d| T::from_f64(d)).collect();
            let (sl, sl_grad) = smooth_l1(&pred, &tgt)?;
            total += sl * scale;
            let g = grad.data_mut();
            for k in 0..4 {
                let idx = (base + 2 + k) * plane + i;
                g[idx] = g[idx] + sl_grad[k] * T::from_f64(scale);
            }
        }
    }
    Ok((total, grad))
}

/// Adapts a trained single-channel detector to the pluggable proposal
/// interface, selected by the name "detector".
pub struct DetectorSource<'a> {
    det: &'a Detector<f32>,
}

impl<'a> DetectorSource<'a> {
    pub fn new(det: &'a Detector<f32>) -> Result<Self> {
        if det.cfg.in_channels != 1 {
            return Err(ArchError::ConfigInvalid(
                "proposal generation feeds one slice plane; detector must take 1 channel".into(),
            ));
        }
        Ok(DetectorSource { det })
    }
}

impl ctxwin::ProposalSource for DetectorSource<'_> {
    fn name(&self) -> &'static str {
        "detector"
    }

    fn propose(&self, ctx: &ctxwin::SliceContext<'_>, count: usize) -> Vec<Proposal> {
        let (w, h) = ctx.scaled_dims;
        let mut data = vec![0.0f32; w * h];
        for y in 0..h {
            for x in 0..w {
                data[x * h + y] = ctx.image[x + w * y];
            }
        }
        let Ok(plane) = Tensor::from_vec(&[1, w, h, 1], data) else {
            return Vec::new();
        };
        let mut plane = plane;
        crate::train::z_score_per_channel(&mut plane);
        let Ok(input) = plane.reshape(&[1, 1, w, h, 1]) else {
            return Vec::new();
        };
        let Ok((map, _)) = self.det.forward(&input) else {
            return Vec::new();
        };
        let Ok(boxes) = self.det.decode_boxes(&map, ctx.scaled_dims, count) else {
            return Vec::new();
        };
        boxes
            .into_iter()
            .map(|(rect, score)| Proposal {
                rect,
                score,
                slice_z: ctx.slice_z,
                scale_id: ctx.scale_id,
            })
            .collect()
    }
}

/// Probability maps after zeroing the weights are uniform; kept as a helper
/// for the symmetry check.
pub fn uniform_score_check<T: Element>(det: &Detector<T>, dims: (usize, usize)) -> Result<bool> {
    let input = Tensor::full(&[1, det.cfg.in_channels, dims.0, dims.1, 1], T::from_f64(0.3));
    let (map, _) = det.forward(&input)?;
    let scores = det.objectness(&map)?;
    Ok(scores
        .iter()
        .all(|plane| plane.iter().all(|&s| (s - 0.5).abs() < 1e-12)))
}
