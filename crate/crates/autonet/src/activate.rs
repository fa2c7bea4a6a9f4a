//! Pointwise activation and per-channel bias, with their adjoints.

use crate::error::{Result, TensorError};
use crate::tensor::{check_same_shape, Element, Tensor};

pub fn relu<T: Element>(input: &Tensor<T>) -> Tensor<T> {
    input.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// Gradient of `relu` at the recorded forward input; the subgradient at
/// exactly zero is taken as zero.
pub fn relu_backward<T: Element>(grad_out: &Tensor<T>, input: &Tensor<T>) -> Result<Tensor<T>> {
    check_same_shape("relu_backward", grad_out, input)?;
    let mut grad_in = Tensor::zeros(input.shape());
    let gi = grad_in.data_mut();
    for (i, (&g, &x)) in grad_out.data().iter().zip(input.data()).enumerate() {
        if x > T::zero() {
            gi[i] = g;
        }
    }
    Ok(grad_in)
}

/// Adds `bias[c]` to every element of channel `c` of an `(N, C, X, Y, Z)`
/// tensor.
pub fn add_channel_bias<T: Element>(input: &Tensor<T>, bias: &[T]) -> Result<Tensor<T>> {
    let s = input.shape();
    if s.len() != 5 || s[1] != bias.len() {
        return Err(TensorError::ShapeMismatch(format!(
            "bias of {} channels against tensor {:?}",
            bias.len(),
            s
        )));
    }
    let spatial = s[2] * s[3] * s[4];
    let mut out = input.clone();
    let data = out.data_mut();
    for n in 0..s[0] {
        for (c, &b) in bias.iter().enumerate() {
            let start = (n * bias.len() + c) * spatial;
            for v in &mut data[start..start + spatial] {
                *v = *v + b;
            }
        }
    }
    Ok(out)
}

/// Gradient of the bias: sums `grad_out` over batch and spatial axes.
pub fn channel_bias_backward<T: Element>(grad_out: &Tensor<T>) -> Result<Vec<T>> {
    let s = grad_out.shape();
    if s.len() != 5 {
        return Err(TensorError::ShapeMismatch(format!(
            "bias gradient needs (N, C, X, Y, Z), got {:?}",
            s
        )));
    }
    let spatial = s[2] * s[3] * s[4];
    let mut grad = vec![T::zero(); s[1]];
    for n in 0..s[0] {
        for c in 0..s[1] {
            let start = (n * s[1] + c) * spatial;
            let mut acc = T::zero();
            for &g in &grad_out.data()[start..start + spatial] {
                acc = acc + g;
            }
            grad[c] = grad[c] + acc;
        }
    }
    Ok(grad)
}
