//! 3D convolution (cross-correlation) with dilation, plus its exact adjoint.
//!
//! Tensors are `(N, C, X, Y, Z)`, weights `(Co, Ci, Kx, Ky, Kz)`, z fastest.
//! A kernel tap `k` with dilation `d` reads the input at offset `k*d`, so the
//! effective kernel extent along an axis is `(k-1)*d + 1`. Output extent per
//! axis is `floor((in + 2*pad - ((k-1)*d + 1)) / stride) + 1`.
//!
//! Accumulation per output element runs in fixed `(ci, kx, ky, kz)` order, so
//! results are bit-reproducible and match a plain nested-loop evaluation.

use crate::error::{Result, TensorError};
use crate::tensor::{Element, Tensor};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: [usize; 3],
    pub stride: usize,
    pub dilation: usize,
    pub padding: [usize; 3],
}

impl ConvSpec {
    /// Stride-1 convolution that preserves spatial extents for odd kernels
    /// (`pad = (k-1)*d/2` per axis).
    pub fn same(in_channels: usize, out_channels: usize, kernel: [usize; 3], dilation: usize) -> Self {
        let pad = |k: usize| (k - 1) * dilation / 2;
        ConvSpec {
            in_channels,
            out_channels,
            kernel,
            stride: 1,
            dilation,
            padding: [pad(kernel[0]), pad(kernel[1]), pad(kernel[2])],
        }
    }

    pub fn effective_kernel(&self, axis: usize) -> usize {
        (self.kernel[axis] - 1) * self.dilation + 1
    }

    pub fn out_extent(&self, in_extent: usize, axis: usize) -> Result<usize> {
        let eff = self.effective_kernel(axis);
        let padded = in_extent + 2 * self.padding[axis];
        if eff > padded {
            return Err(TensorError::SpecInvalid(format!(
                "effective kernel {} exceeds padded extent {} on axis {}",
                eff, padded, axis
            )));
        }
        Ok((padded - eff) / self.stride + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.out_channels == 0 {
            return Err(TensorError::SpecInvalid("zero channel count".into()));
        }
        if self.kernel.iter().any(|&k| k == 0) || self.stride == 0 || self.dilation == 0 {
            return Err(TensorError::SpecInvalid(
                "kernel extents, stride and dilation must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of weights, excluding any bias.
    pub fn weight_count(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel[0] * self.kernel[1] * self.kernel[2]
    }

    pub fn weight_shape(&self) -> [usize; 5] {
        [
            self.out_channels,
            self.in_channels,
            self.kernel[0],
            self.kernel[1],
            self.kernel[2],
        ]
    }
}

struct Geometry {
    batch: usize,
    in_dims: [usize; 3],
    out_dims: [usize; 3],
}

fn geometry<T: Element>(input: &Tensor<T>, weights: &Tensor<T>, spec: &ConvSpec) -> Result<Geometry> {
    spec.validate()?;
    let ishape = input.shape();
    if ishape.len() != 5 {
        return Err(TensorError::ShapeMismatch(format!(
            "conv3 input must be (N, C, X, Y, Z), got {:?}",
            ishape
        )));
    }
    if ishape[1] != spec.in_channels {
        return Err(TensorError::ShapeMismatch(format!(
            "conv3 input has {} channels, spec wants {}",
            ishape[1], spec.in_channels
        )));
    }
    if weights.shape() != spec.weight_shape() {
        return Err(TensorError::ShapeMismatch(format!(
            "conv3 weights {:?}, spec wants {:?}",
            weights.shape(),
            spec.weight_shape()
        )));
    }
    let in_dims = [ishape[2], ishape[3], ishape[4]];
    let out_dims = [
        spec.out_extent(in_dims[0], 0)?,
        spec.out_extent(in_dims[1], 1)?,
        spec.out_extent(in_dims[2], 2)?,
    ];
    Ok(Geometry {
        batch: ishape[0],
        in_dims,
        out_dims,
    })
}

/// Output index range `[lo, hi)` where `o*stride + t` lands inside `[0, in_n)`.
#[inline]
fn valid_range(out_n: usize, in_n: usize, t: isize, stride: usize) -> (usize, usize) {
    let lo = if t >= 0 {
        0
    } else {
        ((-t) as usize + stride - 1) / stride
    };
    let top = in_n as isize - 1 - t;
    if top < 0 {
        return (0, 0);
    }
    let hi = top as usize / stride + 1;
    (lo.min(out_n), hi.min(out_n))
}

pub fn conv3_forward<T: Element>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    spec: &ConvSpec,
) -> Result<Tensor<T>> {
    let g = geometry(input, weights, spec)?;
    let [xi, yi, zi] = g.in_dims;
    let [xo, yo, zo] = g.out_dims;
    let (ci_n, co_n) = (spec.in_channels, spec.out_channels);
    let [kx_n, ky_n, kz_n] = spec.kernel;
    let (s, d) = (spec.stride, spec.dilation);
    let [px, py, pz] = spec.padding;

    let mut out = Tensor::zeros(&[g.batch, co_n, xo, yo, zo]);
    let in_data = input.data();
    let w_data = weights.data();
    let out_data = out.data_mut();

    let in_slab = xi * yi * zi;
    let out_slab = xo * yo * zo;

    for n in 0..g.batch {
        for co in 0..co_n {
            let o_base = (n * co_n + co) * out_slab;
            for ci in 0..ci_n {
                let i_base = (n * ci_n + ci) * in_slab;
                for kx in 0..kx_n {
                    let tx = (kx * d) as isize - px as isize;
                    let (ox_lo, ox_hi) = valid_range(xo, xi, tx, s);
                    for ky in 0..ky_n {
                        let ty = (ky * d) as isize - py as isize;
                        let (oy_lo, oy_hi) = valid_range(yo, yi, ty, s);
                        for kz in 0..kz_n {
                            let tz = (kz * d) as isize - pz as isize;
                            let (oz_lo, oz_hi) = valid_range(zo, zi, tz, s);
                            if oz_lo >= oz_hi || oy_lo >= oy_hi || ox_lo >= ox_hi {
                                continue;
                            }
                            let w = w_data[(((co * ci_n + ci) * kx_n + kx) * ky_n + ky) * kz_n + kz];
                            for ox in ox_lo..ox_hi {
                                let ix = (ox * s) as isize + tx;
                                for oy in oy_lo..oy_hi {
                                    let iy = (oy * s) as isize + ty;
                                    let orow = o_base + (ox * yo + oy) * zo;
                                    let irow = i_base + (ix as usize * yi + iy as usize) * zi;
                                    if s == 1 {
                                        let iz0 = (oz_lo as isize + tz) as usize;
                                        let dst = &mut out_data[orow + oz_lo..orow + oz_hi];
                                        let src = &in_data[irow + iz0..irow + iz0 + (oz_hi - oz_lo)];
                                        for (o, &x) in dst.iter_mut().zip(src) {
                                            *o = *o + w * x;
                                        }
                                    } else {
                                        for oz in oz_lo..oz_hi {
                                            let iz = ((oz * s) as isize + tz) as usize;
                                            out_data[orow + oz] =
                                                out_data[orow + oz] + w * in_data[irow + iz];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Exact adjoint of [`conv3_forward`]: gradients w.r.t. input and weights.
pub fn conv3_backward<T: Element>(
    grad_out: &Tensor<T>,
    input: &Tensor<T>,
    weights: &Tensor<T>,
    spec: &ConvSpec,
) -> Result<(Tensor<T>, Tensor<T>)> {
    let g = geometry(input, weights, spec)?;
    let [xi, yi, zi] = g.in_dims;
    let [xo, yo, zo] = g.out_dims;
    let expect = [g.batch, spec.out_channels, xo, yo, zo];
    if grad_out.shape() != expect {
        return Err(TensorError::ShapeMismatch(format!(
            "conv3 grad_out {:?}, forward output is {:?}",
            grad_out.shape(),
            expect
        )));
    }
    let (ci_n, co_n) = (spec.in_channels, spec.out_channels);
    let [kx_n, ky_n, kz_n] = spec.kernel;
    let (s, d) = (spec.stride, spec.dilation);
    let [px, py, pz] = spec.padding;

    let mut grad_in = Tensor::zeros(input.shape());
    let mut grad_w = Tensor::zeros(weights.shape());
    let go_data = grad_out.data();
    let in_data = input.data();
    let w_data = weights.data();
    let gi_data = grad_in.data_mut();
    let gw_data = grad_w.data_mut();

    let in_slab = xi * yi * zi;
    let out_slab = xo * yo * zo;

    for n in 0..g.batch {
        for co in 0..co_n {
            let o_base = (n * co_n + co) * out_slab;
            for ci in 0..ci_n {
                let i_base = (n * ci_n + ci) * in_slab;
                for kx in 0..kx_n {
                    let tx = (kx * d) as isize - px as isize;
                    let (ox_lo, ox_hi) = valid_range(xo, xi, tx, s);
                    for ky in 0..ky_n {
                        let ty = (ky * d) as isize - py as isize;
                        let (oy_lo, oy_hi) = valid_range(yo, yi, ty, s);
                        for kz in 0..kz_n {
                            let tz = (kz * d) as isize - pz as isize;
                            let (oz_lo, oz_hi) = valid_range(zo, zi, tz, s);
                            if oz_lo >= oz_hi || oy_lo >= oy_hi || ox_lo >= ox_hi {
                                continue;
                            }
                            let w_idx = (((co * ci_n + ci) * kx_n + kx) * ky_n + ky) * kz_n + kz;
                            let w = w_data[w_idx];
                            let mut w_acc = T::zero();
                            for ox in ox_lo..ox_hi {
                                let ix = ((ox * s) as isize + tx) as usize;
                                for oy in oy_lo..oy_hi {
                                    let iy = ((oy * s) as isize + ty) as usize;
                                    let orow = o_base + (ox * yo + oy) * zo;
                                    let irow = i_base + (ix * yi + iy) * zi;
                                    if s == 1 {
                                        let iz0 = (oz_lo as isize + tz) as usize;
                                        let go_row = &go_data[orow + oz_lo..orow + oz_hi];
                                        let gi_row =
                                            &mut gi_data[irow + iz0..irow + iz0 + (oz_hi - oz_lo)];
                                        let in_row =
                                            &in_data[irow + iz0..irow + iz0 + (oz_hi - oz_lo)];
                                        for ((gi, &go), &x) in
                                            gi_row.iter_mut().zip(go_row).zip(in_row)
                                        {
                                            *gi = *gi + w * go;
                                            w_acc = w_acc + go * x;
                                        }
                                    } else {
                                        for oz in oz_lo..oz_hi {
                                            let iz = ((oz * s) as isize + tz) as usize;
                                            let go = go_data[orow + oz];
                                            gi_data[irow + iz] = gi_data[irow + iz] + w * go;
                                            w_acc = w_acc + go * in_data[irow + iz];
                                        }
                                    }
                                }
                            }
                            gw_data[w_idx] = gw_data[w_idx] + w_acc;
                        }
                    }
                }
            }
        }
    }
    Ok((grad_in, grad_w))
}
