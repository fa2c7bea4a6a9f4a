//! Channel-axis concatenation of `(N, C, X, Y, Z)` tensors, and the split
//! that undoes it (used to route gradients back to each branch).

use crate::error::{Result, TensorError};
use crate::tensor::{Element, Tensor};

pub fn concat_channels<T: Element>(parts: &[&Tensor<T>]) -> Result<Tensor<T>> {
    if parts.is_empty() {
        return Err(TensorError::ShapeMismatch("concat of zero tensors".into()));
    }
    let first = parts[0].shape();
    if first.len() != 5 {
        return Err(TensorError::ShapeMismatch(format!(
            "concat input must be (N, C, X, Y, Z), got {:?}",
            first
        )));
    }
    let mut total_c = 0usize;
    for p in parts {
        let s = p.shape();
        if s.len() != 5 || s[0] != first[0] || s[2..] != first[2..] {
            return Err(TensorError::ShapeMismatch(format!(
                "concat parts disagree outside the channel axis: {:?} vs {:?}",
                first, s
            )));
        }
        total_c += s[1];
    }
    let (nb, xs, ys, zs) = (first[0], first[2], first[3], first[4]);
    let spatial = xs * ys * zs;
    let mut out = Tensor::zeros(&[nb, total_c, xs, ys, zs]);
    let out_data = out.data_mut();
    for n in 0..nb {
        let mut c_off = 0usize;
        for p in parts {
            let pc = p.shape()[1];
            let src = &p.data()[n * pc * spatial..(n + 1) * pc * spatial];
            let dst_start = (n * total_c + c_off) * spatial;
            out_data[dst_start..dst_start + pc * spatial].copy_from_slice(src);
            c_off += pc;
        }
    }
    Ok(out)
}

/// Splits along the channel axis into chunks of `channels[i]`; inverse of
/// [`concat_channels`].
pub fn split_channels<T: Element>(input: &Tensor<T>, channels: &[usize]) -> Result<Vec<Tensor<T>>> {
    let s = input.shape();
    if s.len() != 5 {
        return Err(TensorError::ShapeMismatch(format!(
            "split input must be (N, C, X, Y, Z), got {:?}",
            s
        )));
    }
    let total: usize = channels.iter().sum();
    if total != s[1] {
        return Err(TensorError::ShapeMismatch(format!(
            "split channels {:?} sum to {}, tensor has {}",
            channels, total, s[1]
        )));
    }
    let (nb, xs, ys, zs) = (s[0], s[2], s[3], s[4]);
    let spatial = xs * ys * zs;
    let mut parts: Vec<Tensor<T>> = channels
        .iter()
        .map(|&c| Tensor::zeros(&[nb, c, xs, ys, zs]))
        .collect();
    for n in 0..nb {
        let mut c_off = 0usize;
        for (part, &pc) in parts.iter_mut().zip(channels) {
            let src_start = (n * s[1] + c_off) * spatial;
            let dst_start = n * pc * spatial;
            part.data_mut()[dst_start..dst_start + pc * spatial]
                .copy_from_slice(&input.data()[src_start..src_start + pc * spatial]);
            c_off += pc;
        }
    }
    Ok(parts)
}
