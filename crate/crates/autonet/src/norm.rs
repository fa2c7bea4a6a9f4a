//! Per-group feature normalization over (channel-group x spatial) slices.
//!
//! Each (batch, group) slice is centered and scaled to unit variance
//! (biased estimate, stabilized by `eps`). No learnable affine: the
//! convolution that follows supplies scale and shift capacity.

use crate::error::{Result, TensorError};
use crate::tensor::{Element, Tensor};

pub struct NormTrace<T> {
    /// The normalized output, reused by the backward pass.
    pub normalized: Tensor<T>,
    /// 1 / sqrt(var + eps) per (batch, group).
    inv_std: Vec<f64>,
    groups: usize,
}

fn check_layout<T: Element>(input: &Tensor<T>, groups: usize) -> Result<(usize, usize, usize)> {
    let s = input.shape();
    if s.len() != 5 {
        return Err(TensorError::ShapeMismatch(format!(
            "group norm expects (N, C, X, Y, Z), got {s:?}"
        )));
    }
    if groups == 0 || s[1] % groups != 0 {
        return Err(TensorError::SpecInvalid(format!(
            "{} channels cannot split into {} groups",
            s[1], groups
        )));
    }
    Ok((s[0], groups, (s[1] / groups) * s[2] * s[3] * s[4]))
}

pub fn group_norm_forward<T: Element>(
    input: &Tensor<T>,
    groups: usize,
    eps: f64,
) -> Result<(Tensor<T>, NormTrace<T>)> {
    let (nb, ng, m) = check_layout(input, groups)?;
    if !(eps > 0.0) {
        return Err(TensorError::SpecInvalid(format!(
            "group norm eps must be positive, got {eps}"
        )));
    }
    let x = input.data();
    let mut out = Tensor::zeros(input.shape());
    let mut inv_std = Vec::with_capacity(nb * ng);
    for g in 0..nb * ng {
        let slice = &x[g * m..(g + 1) * m];
        let mean = slice.iter().map(|v| v.to_f64s()).sum::<f64>() / m as f64;
        let var = slice
            .iter()
            .map(|v| {
                let d = v.to_f64s() - mean;
                d * d
            })
            .sum::<f64>()
            / m as f64;
        let s = 1.0 / (var + eps).sqrt();
        inv_std.push(s);
        let o = &mut out.data_mut()[g * m..(g + 1) * m];
        for (oi, xi) in o.iter_mut().zip(slice) {
            *oi = T::from_f64((xi.to_f64s() - mean) * s);
        }
    }
    let trace = NormTrace {
        normalized: out.clone(),
        inv_std,
        groups,
    };
    Ok((out, trace))
}

pub fn group_norm_backward<T: Element>(
    grad_out: &Tensor<T>,
    trace: &NormTrace<T>,
) -> Result<Tensor<T>> {
    let (nb, ng, m) = check_layout(&trace.normalized, trace.groups)?;
    if grad_out.shape() != trace.normalized.shape() {
        return Err(TensorError::ShapeMismatch(format!(
            "group norm grad {:?} vs output {:?}",
            grad_out.shape(),
            trace.normalized.shape()
        )));
    }
    let g = grad_out.data();
    let y = trace.normalized.data();
    let mut grad_in = Tensor::zeros(grad_out.shape());
    for gi in 0..nb * ng {
        let lo = gi * m;
        let hi = lo + m;
        let mut g_mean = 0.0f64;
        let mut gy_mean = 0.0f64;
        for i in lo..hi {
            g_mean += g[i].to_f64s();
            gy_mean += g[i].to_f64s() * y[i].to_f64s();
        }
        g_mean /= m as f64;
        gy_mean /= m as f64;
        let s = trace.inv_std[gi];
        let out = &mut grad_in.data_mut()[lo..hi];
        for (k, o) in out.iter_mut().enumerate() {
            let i = lo + k;
            *o = T::from_f64(s * (g[i].to_f64s() - g_mean - y[i].to_f64s() * gy_mean));
        }
    }
    Ok(grad_in)
}
