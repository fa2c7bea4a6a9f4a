//! The multi-resolution segmentation network.
//!
//! Full-resolution and half-resolution stages use vanilla 3x3x3
//! convolutions; the quarter-resolution stage runs two parallel atrous
//! paths (3x3x3 kernels, dilation rates 2 and 3). Every stage output is
//! upsampled back to the input resolution and concatenated — 32 + 64 +
//! 128 + 256 = 480 channels by default — then a 1x1x1 convolution maps to
//! the four class logits.

use std::path::Path;

use autonet::checkpoint::{load_checkpoint, save_checkpoint};
use autonet::concat::{concat_channels, split_channels};
use autonet::pool::{maxpool2_backward, maxpool2_forward, PoolIndices};
use autonet::resample::{resize_trilinear, resize_trilinear_backward};
use autonet::{ConvSpec, Element, Tensor, TensorError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SegNetConfig;
use crate::error::{ArchError, Result};
use crate::layers::{stage_backward, stage_forward, stage_infer, ConvLayer, LayerGrads, LayerTrace};

pub struct SegNet<T: Element> {
    pub cfg: SegNetConfig,
    pub full: Vec<ConvLayer<T>>,
    pub half: Vec<ConvLayer<T>>,
    pub quarter_a: Vec<ConvLayer<T>>,
    pub quarter_b: Vec<ConvLayer<T>>,
    pub head: ConvLayer<T>,
}

pub struct SegTrace<T: Element> {
    full_t: Vec<LayerTrace<T>>,
    half_t: Vec<LayerTrace<T>>,
    qa_t: Vec<LayerTrace<T>>,
    qb_t: Vec<LayerTrace<T>>,
    head_t: LayerTrace<T>,
    pool1: PoolIndices,
    pool2: PoolIndices,
    half_shape: Vec<usize>,
    qa_shape: Vec<usize>,
    qb_shape: Vec<usize>,
}

pub struct SegGrads<T: Element> {
    pub full: Vec<LayerGrads<T>>,
    pub half: Vec<LayerGrads<T>>,
    pub quarter_a: Vec<LayerGrads<T>>,
    pub quarter_b: Vec<LayerGrads<T>>,
    pub head: LayerGrads<T>,
}

impl<T: Element> SegGrads<T> {
    /// Tensors in the same order as `SegNet::layers` interleaves weights and
    /// biases.
    pub fn flat(&self) -> Vec<&Tensor<T>> {
        let mut out = Vec::new();
        for g in self
            .full
            .iter()
            .chain(&self.half)
            .chain(&self.quarter_a)
            .chain(&self.quarter_b)
            .chain(std::iter::once(&self.head))
        {
            out.push(&g.weight);
            out.push(&g.bias);
        }
        out
    }
}

fn build_stage<T: Element>(
    name: &str,
    in_channels: usize,
    out_channels: usize,
    dilation: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ConvLayer<T>>> {
    (0..count)
        .map(|i| {
            let cin = if i == 0 { in_channels } else { out_channels };
            ConvLayer::init(
                &format!("{name}.{i}"),
                ConvSpec::same(cin, out_channels, [3, 3, 3], dilation),
                rng,
            )
        })
        .collect()
}

impl<T: Element> SegNet<T> {
    /// Fresh network with He-normal weights drawn from the seed.
    pub fn build(cfg: &SegNetConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [c_full, c_half, c_qa, c_qb] = cfg.channels;
        let n = cfg.convs_per_stage;
        let full = build_stage("full", cfg.in_channels, c_full, 1, n, &mut rng)?;
        let half = build_stage("half", c_full, c_half, 1, n, &mut rng)?;
        let quarter_a = build_stage("quarter_a", c_half, c_qa, cfg.dilations[0], n, &mut rng)?;
        let quarter_b = build_stage("quarter_b", c_half, c_qb, cfg.dilations[1], n, &mut rng)?;
        let mut head = ConvLayer::init(
            "head",
            ConvSpec::same(cfg.concat_channels(), cfg.classes, [1, 1, 1], 1),
            &mut rng,
        )?;
        // the head starts at zero so every class opens uniform; a randomly
        // initialized head lets the softmax saturate before rare classes see
        // any signal, which kills their gradient under dice loss
        for v in head.weight.data_mut() {
            *v = T::default();
        }
        Ok(SegNet {
            cfg: cfg.clone(),
            full,
            half,
            quarter_a,
            quarter_b,
            head,
        })
    }

    pub fn layers(&self) -> Vec<&ConvLayer<T>> {
        self.full
            .iter()
            .chain(&self.half)
            .chain(&self.quarter_a)
            .chain(&self.quarter_b)
            .chain(std::iter::once(&self.head))
            .collect()
    }

    pub fn layers_mut(&mut self) -> Vec<&mut ConvLayer<T>> {
        self.full
            .iter_mut()
            .chain(self.half.iter_mut())
            .chain(self.quarter_a.iter_mut())
            .chain(self.quarter_b.iter_mut())
            .chain(std::iter::once(&mut self.head))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|l| l.param_count()).sum()
    }

    /// Logits with the same spatial extent as the input.
    pub fn forward(&self, input: &Tensor<T>) -> Result<(Tensor<T>, SegTrace<T>)> {
        let s = input.shape();
        if s.len() != 5 || s[1] != self.cfg.in_channels {
            return Err(ArchError::Tensor(TensorError::ShapeMismatch(format!(
                "expected (N, {}, X, Y, Z) input, got {s:?}",
                self.cfg.in_channels
            ))));
        }
        let ng = self.cfg.norm_groups;
        let full_dims = [s[2], s[3], s[4]];

        let (f1, full_t) = stage_forward(&self.full, input, ng)?;
        let (p1, pool1) = maxpool2_forward(&f1)?;
        let (f2, half_t) = stage_forward(&self.half, &p1, ng)?;
        let (p2, pool2) = maxpool2_forward(&f2)?;
        let (qa, qa_t) = stage_forward(&self.quarter_a, &p2, ng)?;
        let (qb, qb_t) = stage_forward(&self.quarter_b, &p2, ng)?;

        let u2 = resize_trilinear(&f2, full_dims)?;
        let ua = resize_trilinear(&qa, full_dims)?;
        let ub = resize_trilinear(&qb, full_dims)?;
        let cat = concat_channels(&[&f1, &u2, &ua, &ub])?;
        let (logits, head_t) = self.head.forward(&cat, 0, false)?;
        Ok((
            logits,
            SegTrace {
                full_t,
                half_t,
                qa_t,
                qb_t,
                head_t,
                pool1,
                pool2,
                half_shape: f2.shape().to_vec(),
                qa_shape: qa.shape().to_vec(),
                qb_shape: qb.shape().to_vec(),
            },
        ))
    }

    /// Parameter gradients for a given logits gradient.
    /// Forward pass that keeps no backward state; use for inference so a
    /// full-size patch does not hold training traces in memory.
    pub fn infer(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        let s = input.shape();
        if s.len() != 5 || s[1] != self.cfg.in_channels {
            return Err(ArchError::Tensor(TensorError::ShapeMismatch(format!(
                "expected (N, {}, X, Y, Z) input, got {s:?}",
                self.cfg.in_channels
            ))));
        }
        let ng = self.cfg.norm_groups;
        let full_dims = [s[2], s[3], s[4]];
        let f1 = stage_infer(&self.full, input, ng)?;
        let (p1, _) = maxpool2_forward(&f1)?;
        let f2 = stage_infer(&self.half, &p1, ng)?;
        drop(p1);
        let (p2, _) = maxpool2_forward(&f2)?;
        let qa = stage_infer(&self.quarter_a, &p2, ng)?;
        let qb = stage_infer(&self.quarter_b, &p2, ng)?;
        drop(p2);
        let u2 = resize_trilinear(&f2, full_dims)?;
        drop(f2);
        let ua = resize_trilinear(&qa, full_dims)?;
        drop(qa);
        let ub = resize_trilinear(&qb, full_dims)?;
        drop(qb);
        let cat = concat_channels(&[&f1, &u2, &ua, &ub])?;
        drop((f1, u2, ua, ub));
        self.head.infer(&cat, 0, false)
    }

    pub fn backward(&self, trace: &SegTrace<T>, grad_logits: &Tensor<T>) -> Result<SegGrads<T>> {
        let one = T::from_f64(1.0);
        let (grad_cat, head_g) = self.head.backward(&trace.head_t, grad_logits, false)?;
        let parts = split_channels(&grad_cat, &self.cfg.channels)?;

        let g_f2_res = resize_trilinear_backward(&parts[1], &trace.half_shape)?;
        let g_qa = resize_trilinear_backward(&parts[2], &trace.qa_shape)?;
        let g_qb = resize_trilinear_backward(&parts[3], &trace.qb_shape)?;

        let (g_p2_a, qa_g) = stage_backward(&self.quarter_a, &trace.qa_t, &g_qa)?;
        let (g_p2_b, qb_g) = stage_backward(&self.quarter_b, &trace.qb_t, &g_qb)?;
        let g_p2 = g_p2_a.scale_add(one, &g_p2_b, one)?;
        let g_f2_pool = maxpool2_backward(&g_p2, &trace.pool2)?;
        let g_f2 = g_f2_res.scale_add(one, &g_f2_pool, one)?;

        let (g_p1, half_g) = stage_backward(&self.half, &trace.half_t, &g_f2)?;
        let g_f1_pool = maxpool2_backward(&g_p1, &trace.pool1)?;
        let g_f1 = parts[0].scale_add(one, &g_f1_pool, one)?;
        let (_g_input, full_g) = stage_backward(&self.full, &trace.full_t, &g_f1)?;

        Ok(SegGrads {
            full: full_g,
            half: half_g,
            quarter_a: qa_g,
            quarter_b: qb_g,
            head: head_g,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()>
    where
        T: Element,
    {
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
        let refs: Vec<(String, &Tensor<f32>)> = f32_params
            .iter()
            .map(|(n, t)| (n.clone(), t))
            .collect();
        save_checkpoint(path, &refs)?;
        Ok(())
    }

    /// Build from config, then fill every parameter from the checkpoint.
    /// Name or shape disagreements are rejected.
    pub fn load(cfg: &SegNetConfig, path: &Path) -> Result<Self> {
        let mut net = SegNet::<T>::build(cfg, 0)?;
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
}

/// Shape arithmetic without building or running the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShapeAudit {
    /// Channel width of the concatenated multi-resolution feature map.
    pub concat_channels: usize,
    /// Spatial dims of the pre-head feature map (always the input dims).
    pub feature_dims: [usize; 3],
    pub logits_channels: usize,
    /// Closed-form parameter count over the declared convolution specs.
    pub parameter_count: usize,
}

/// Symbolic audit of the network the config describes, for any input size.
pub fn audit_shapes(cfg: &SegNetConfig, input_dims: [usize; 3]) -> Result<ShapeAudit> {
    cfg.validate()?;
    if input_dims.iter().any(|&d| d == 0) {
        return Err(ArchError::ConfigInvalid("input dims must be >= 1".into()));
    }
    let conv_params = |cin: usize, cout: usize, k: usize| cin * cout * k * k * k + cout;
    let stage_params = |cin: usize, cout: usize| {
        conv_params(cin, cout, 3)
            + (cfg.convs_per_stage - 1) * conv_params(cout, cout, 3)
    };
    let [c0, c1, c2, c3] = cfg.channels;
    let parameter_count = stage_params(cfg.in_channels, c0)
        + stage_params(c0, c1)
        + stage_params(c1, c2)
        + stage_params(c1, c3)
        + conv_params(cfg.concat_channels(), cfg.classes, 1);
    Ok(ShapeAudit {
        concat_channels: cfg.concat_channels(),
        feature_dims: input_dims,
        logits_channels: cfg.classes,
        parameter_count,
    })
}

/// Sum class probabilities into the three nested region maps:
/// whole = p1+p2+p4, core = p1+p4, enhancing = p4, with classes ordered
/// (background, label 1, label 2, label 4).
pub fn region_probs<T: Element>(probs: &Tensor<T>) -> Result<Tensor<T>> {
    let s = probs.shape();
    if s.len() != 5 || s[1] != 4 {
        return Err(ArchError::Tensor(TensorError::ShapeMismatch(format!(
            "region sums expect (N, 4, X, Y, Z) probabilities, got {s:?}"
        ))));
    }
    let (nb, spatial) = (s[0], s[2] * s[3] * s[4]);
    let mut out = Tensor::zeros(&[nb, 3, s[2], s[3], s[4]]);
    let p = probs.data();
    let o = out.data_mut();
    for n in 0..nb {
        let pb = n * 4 * spatial;
        let ob = n * 3 * spatial;
        for v in 0..spatial {
            let p1 = p[pb + spatial + v];
            let p2 = p[pb + 2 * spatial + v];
            let p4 = p[pb + 3 * spatial + v];
            o[ob + v] = p1 + p2 + p4;
            o[ob + spatial + v] = p1 + p4;
            o[ob + 2 * spatial + v] = p4;
        }
    }
    Ok(out)
}

/// Adjoint of `region_probs`: class-probability gradients from region
/// gradients.
pub fn region_probs_backward<T: Element>(
    grad_regions: &Tensor<T>,
    class_shape: &[usize],
) -> Result<Tensor<T>> {
    let s = grad_regions.shape();
    if s.len() != 5 || s[1] != 3 || class_shape.len() != 5 || class_shape[1] != 4 {
        return Err(ArchError::Tensor(TensorError::ShapeMismatch(format!(
            "region adjoint: grad {s:?} vs class shape {class_shape:?}"
        ))));
    }
    let (nb, spatial) = (s[0], s[2] * s[3] * s[4]);
    let mut out = Tensor::zeros(class_shape);
    let g = grad_regions.data();
    let o = out.data_mut();
    for n in 0..nb {
        let gb = n * 3 * spatial;
        let ob = n * 4 * spatial;
        for v in 0..spatial {
            let gw = g[gb + v];
            let gc = g[gb + spatial + v];
            let ge = g[gb + 2 * spatial + v];
            o[ob + spatial + v] = gw + gc;
            o[ob + 2 * spatial + v] = gw;
            o[ob + 3 * spatial + v] = gw + gc + ge;
        }
    }
    Ok(out)
}
