//! Trilinear resampling of `(N, C, X, Y, Z)` tensors to a new spatial size,
//! with the exact adjoint used by backpropagation.
//!
//! Coordinates map corner-to-corner: output index `i` reads source position
//! `i * (in - 1) / (out - 1)`, and an axis with a single output sample reads
//! position `0`. Resampling to the input size is the identity.

use crate::error::{Result, TensorError};
use crate::tensor::{Element, Tensor};

struct AxisTap {
    lo: usize,
    hi: usize,
    frac: f64,
}

fn axis_taps(in_n: usize, out_n: usize) -> Vec<AxisTap> {
    (0..out_n)
        .map(|i| {
            let pos = if out_n <= 1 || in_n <= 1 {
                0.0
            } else {
                i as f64 * (in_n - 1) as f64 / (out_n - 1) as f64
            };
            let lo = (pos.floor() as usize).min(in_n - 1);
            let hi = (lo + 1).min(in_n - 1);
            AxisTap {
                lo,
                hi,
                frac: pos - lo as f64,
            }
        })
        .collect()
}

fn check_input<T: Element>(input: &Tensor<T>, out_dims: [usize; 3]) -> Result<()> {
    let s = input.shape();
    if s.len() != 5 {
        return Err(TensorError::ShapeMismatch(format!(
            "resample input must be (N, C, X, Y, Z), got {:?}",
            s
        )));
    }
    if s[2..].iter().any(|&d| d == 0) || out_dims.iter().any(|&d| d == 0) {
        return Err(TensorError::ShapeMismatch(
            "resample extents must be nonzero".into(),
        ));
    }
    Ok(())
}

pub fn resize_trilinear<T: Element>(input: &Tensor<T>, out_dims: [usize; 3]) -> Result<Tensor<T>> {
    check_input(input, out_dims)?;
    let s = input.shape();
    let (nb, cn, xi, yi, zi) = (s[0], s[1], s[2], s[3], s[4]);
    let [xo, yo, zo] = out_dims;
    let tx = axis_taps(xi, xo);
    let ty = axis_taps(yi, yo);
    let tz = axis_taps(zi, zo);

    let mut out = Tensor::zeros(&[nb, cn, xo, yo, zo]);
    let data = input.data();
    let out_data = out.data_mut();
    let mut o = 0usize;
    for n in 0..nb {
        for c in 0..cn {
            let base = (n * cn + c) * xi * yi * zi;
            for ax in &tx {
                let (wx0, wx1) = (1.0 - ax.frac, ax.frac);
                for ay in &ty {
                    let (wy0, wy1) = (1.0 - ay.frac, ay.frac);
                    for az in &tz {
                        let (wz0, wz1) = (1.0 - az.frac, az.frac);
                        let mut acc = 0.0f64;
                        for (x, wx) in [(ax.lo, wx0), (ax.hi, wx1)] {
                            for (y, wy) in [(ay.lo, wy0), (ay.hi, wy1)] {
                                for (z, wz) in [(az.lo, wz0), (az.hi, wz1)] {
                                    let w = wx * wy * wz;
                                    if w != 0.0 {
                                        acc += w
                                            * data[base + (x * yi + y) * zi + z]
                                                .to_f64s();
                                    }
                                }
                            }
                        }
                        out_data[o] = T::from_f64(acc);
                        o += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Adjoint of [`resize_trilinear`]: scatters each output gradient back to the
/// input corners it interpolated, with the same weights.
pub fn resize_trilinear_backward<T: Element>(
    grad_out: &Tensor<T>,
    in_shape: &[usize],
) -> Result<Tensor<T>> {
    let s = grad_out.shape();
    if s.len() != 5 || in_shape.len() != 5 || s[0] != in_shape[0] || s[1] != in_shape[1] {
        return Err(TensorError::ShapeMismatch(format!(
            "resample adjoint: grad {:?} vs input shape {:?}",
            s, in_shape
        )));
    }
    let (nb, cn) = (s[0], s[1]);
    let (xi, yi, zi) = (in_shape[2], in_shape[3], in_shape[4]);
    let tx = axis_taps(xi, s[2]);
    let ty = axis_taps(yi, s[3]);
    let tz = axis_taps(zi, s[4]);

    let mut grad_in = Tensor::zeros(in_shape);
    let gi = grad_in.data_mut();
    let go = grad_out.data();
    let mut o = 0usize;
    for n in 0..nb {
        for c in 0..cn {
            let base = (n * cn + c) * xi * yi * zi;
            for ax in &tx {
                let (wx0, wx1) = (1.0 - ax.frac, ax.frac);
                for ay in &ty {
                    let (wy0, wy1) = (1.0 - ay.frac, ay.frac);
                    for az in &tz {
                        let (wz0, wz1) = (1.0 - az.frac, az.frac);
                        let g = go[o].to_f64s();
                        o += 1;
                        if g == 0.0 {
                            continue;
                        }
                        for (x, wx) in [(ax.lo, wx0), (ax.hi, wx1)] {
                            for (y, wy) in [(ay.lo, wy0), (ay.hi, wy1)] {
                                for (z, wz) in [(az.lo, wz0), (az.hi, wz1)] {
                                    let w = wx * wy * wz;
                                    if w != 0.0 {
                                        let idx = base + (x * yi + y) * zi + z;
                                        gi[idx] = gi[idx] + T::from_f64(w * g);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(grad_in)
}
