//! Training losses and the channel softmax they share.
//!
//! Both losses return a [`LossValue`]: the scalar plus the analytic gradient
//! w.r.t. the loss input, shaped like that input. Reductions are accumulated
//! in f64 regardless of the tensor element type.

use crate::error::{Result, TensorError};
use crate::tensor::{check_same_shape, Element, Tensor};

pub const DICE_EPS: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct LossValue<T> {
    pub value: f64,
    pub gradient: Tensor<T>,
}

/// Numerically stable softmax over the channel axis of `(N, C, X, Y, Z)`.
pub fn softmax_channels<T: Element>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    let s = logits.shape();
    if s.len() != 5 {
        return Err(TensorError::ShapeMismatch(format!(
            "softmax input must be (N, C, X, Y, Z), got {:?}",
            s
        )));
    }
    let (nb, cn) = (s[0], s[1]);
    let spatial = s[2] * s[3] * s[4];
    let mut out = Tensor::zeros(s);
    let data = logits.data();
    let out_data = out.data_mut();
    for n in 0..nb {
        let base = n * cn * spatial;
        for v in 0..spatial {
            let mut max = f64::NEG_INFINITY;
            for c in 0..cn {
                max = max.max(data[base + c * spatial + v].to_f64s());
            }
            let mut total = 0.0f64;
            for c in 0..cn {
                let e = (data[base + c * spatial + v].to_f64s() - max).exp();
                out_data[base + c * spatial + v] = T::from_f64(e);
                total += e;
            }
            for c in 0..cn {
                let idx = base + c * spatial + v;
                out_data[idx] = T::from_f64(out_data[idx].to_f64s() / total);
            }
        }
    }
    Ok(out)
}

/// Pulls a gradient on softmax outputs back to the logits:
/// `g_c = p_c * (gp_c - sum_j gp_j * p_j)` per voxel.
pub fn softmax_channels_backward<T: Element>(
    grad_probs: &Tensor<T>,
    probs: &Tensor<T>,
) -> Result<Tensor<T>> {
    check_same_shape("softmax_backward", grad_probs, probs)?;
    let s = probs.shape();
    let (nb, cn) = (s[0], s[1]);
    let spatial = s[2] * s[3] * s[4];
    let mut grad = Tensor::zeros(s);
    let gp = grad_probs.data();
    let p = probs.data();
    let g = grad.data_mut();
    for n in 0..nb {
        let base = n * cn * spatial;
        for v in 0..spatial {
            let mut dot = 0.0f64;
            for c in 0..cn {
                let idx = base + c * spatial + v;
                dot += gp[idx].to_f64s() * p[idx].to_f64s();
            }
            for c in 0..cn {
                let idx = base + c * spatial + v;
                g[idx] = T::from_f64(p[idx].to_f64s() * (gp[idx].to_f64s() - dot));
            }
        }
    }
    Ok(grad)
}

/// Mean cross-entropy of channel softmax against integer class labels.
///
/// `labels` runs over positions in `(n, x, y, z)` order, one class index per
/// voxel. The gradient w.r.t. the logits is `(softmax - onehot) / count`.
pub fn softmax_ce<T: Element>(logits: &Tensor<T>, labels: &[u32]) -> Result<LossValue<T>> {
    let s = logits.shape();
    if s.len() != 5 {
        return Err(TensorError::ShapeMismatch(format!(
            "softmax_ce logits must be (N, C, X, Y, Z), got {:?}",
            s
        )));
    }
    let (nb, cn) = (s[0], s[1]);
    if cn < 2 {
        return Err(TensorError::ShapeMismatch(format!(
            "softmax_ce needs at least 2 classes, got {}",
            cn
        )));
    }
    let spatial = s[2] * s[3] * s[4];
    if labels.len() != nb * spatial {
        return Err(TensorError::ShapeMismatch(format!(
            "softmax_ce got {} labels for {} positions",
            labels.len(),
            nb * spatial
        )));
    }
    for (pos, &l) in labels.iter().enumerate() {
        if l as usize >= cn {
            return Err(TensorError::LabelOutOfRange {
                label: l as usize,
                classes: cn,
                position: pos,
            });
        }
    }
    let probs = softmax_channels(logits)?;
    let count = (nb * spatial) as f64;
    let mut total = 0.0f64;
    let mut grad = Tensor::zeros(s);
    let g = grad.data_mut();
    let p = probs.data();
    for n in 0..nb {
        let base = n * cn * spatial;
        for v in 0..spatial {
            let label = labels[n * spatial + v] as usize;
            for c in 0..cn {
                let idx = base + c * spatial + v;
                let pc = p[idx].to_f64s();
                let onehot = if c == label { 1.0 } else { 0.0 };
                if c == label {
                    total -= pc.max(f64::MIN_POSITIVE).ln();
                }
                g[idx] = T::from_f64((pc - onehot) / count);
            }
        }
    }
    Ok(LossValue {
        value: total / count,
        gradient: grad,
    })
}

/// Soft overlap loss between a probability field and a binary target:
/// `1 - (2 * sum(p*y) + eps) / (sum(p) + sum(y) + eps)`, with its gradient
/// w.r.t. the probabilities. The smoothing term keeps the ratio defined when
/// both fields are empty.
pub fn soft_dice_loss<T: Element>(
    probs: &Tensor<T>,
    target: &Tensor<T>,
    eps: f64,
) -> Result<LossValue<T>> {
    check_same_shape("soft_dice", probs, target)?;
    let mut inter = 0.0f64;
    let mut p_sum = 0.0f64;
    let mut y_sum = 0.0f64;
    for (&p, &y) in probs.data().iter().zip(target.data()) {
        let (p, y) = (p.to_f64s(), y.to_f64s());
        inter += p * y;
        p_sum += p;
        y_sum += y;
    }
    let num = 2.0 * inter + eps;
    let den = p_sum + y_sum + eps;
    let (value, mut grad) = if den == 0.0 {
        // eps = 0 with both fields empty: define the loss as 0 with no pull
        (0.0, Tensor::zeros(probs.shape()))
    } else {
        (1.0 - num / den, Tensor::zeros(probs.shape()))
    };
    if den != 0.0 {
        // d(loss)/dp_i = -(2*y_i*den - num) / den^2
        let den2 = den * den;
        let g = grad.data_mut();
        for (i, &y) in target.data().iter().enumerate() {
            g[i] = T::from_f64(-(2.0 * y.to_f64s() * den - num) / den2);
        }
    }
    Ok(LossValue {
        value,
        gradient: grad,
    })
}

/// Cross-entropy of one logit vector against a class index, with the gradient
/// on the logits. Used on gathered detector cells rather than whole tensors.
pub fn cross_entropy_logits<T: Element>(logits: &[T], label: usize) -> Result<(f64, Vec<T>)> {
    if label >= logits.len() {
        return Err(TensorError::LabelOutOfRange {
            label,
            classes: logits.len(),
            position: 0,
        });
    }
    let max = logits
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v.to_f64s()));
    let exps: Vec<f64> = logits.iter().map(|&v| (v.to_f64s() - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let loss = total.ln() - (logits[label].to_f64s() - max);
    let grad = exps
        .iter()
        .enumerate()
        .map(|(i, &e)| T::from_f64(e / total - if i == label { 1.0 } else { 0.0 }))
        .collect();
    Ok((loss, grad))
}

/// Binary cross-entropy on a single objectness logit; equivalent to two-class
/// softmax cross-entropy with the other logit pinned at zero. Returns the
/// loss and its derivative w.r.t. the logit.
pub fn logistic_loss(logit: f64, target: bool) -> (f64, f64) {
    let y = if target { 1.0 } else { 0.0 };
    let p = 1.0 / (1.0 + (-logit).exp());
    // stable -ln p(y): ln(1 + e^-|x|) + max(0, -x) for y=1, mirrored for y=0
    let loss = if target {
        (1.0 + (-logit.abs()).exp()).ln() + (-logit).max(0.0)
    } else {
        (1.0 + (-logit.abs()).exp()).ln() + logit.max(0.0)
    };
    (loss, p - y)
}

/// Smooth L1 (Huber) penalty summed over coordinates: quadratic inside
/// `|d| < 1`, linear outside. Returns the summed loss and per-coordinate
/// gradient w.r.t. `pred`.
pub fn smooth_l1<T: Element>(pred: &[T], target: &[T]) -> Result<(f64, Vec<T>)> {
    if pred.len() != target.len() {
        return Err(TensorError::ShapeMismatch(format!(
            "smooth_l1 lengths {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    let mut loss = 0.0f64;
    let mut grad = Vec::with_capacity(pred.len());
    for (&p, &t) in pred.iter().zip(target) {
        let d = p.to_f64s() - t.to_f64s();
        if d.abs() < 1.0 {
            loss += 0.5 * d * d;
            grad.push(T::from_f64(d));
        } else {
            loss += d.abs() - 0.5;
            grad.push(T::from_f64(d.signum()));
        }
    }
    Ok((loss, grad))
}
