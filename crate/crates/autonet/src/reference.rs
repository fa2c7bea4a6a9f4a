//! Slow, obviously-correct reference implementations used by tests to check
//! the optimized kernels. Everything here walks output elements one at a time
//! with explicit bounds checks and no shared index arithmetic.

use crate::conv::ConvSpec;
use crate::error::Result;
use crate::tensor::{Element, Tensor};

/// Plain nested-loop dilated 3D cross-correlation. For each output element the
/// inner sum runs over `(ci, kx, ky, kz)` starting from zero, which is also
/// the accumulation order of the optimized kernel, so in f64 the two agree
/// exactly, not just approximately.
pub fn naive_conv3<T: Element>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    spec: &ConvSpec,
) -> Result<Tensor<T>> {
    spec.validate()?;
    let ishape = input.shape().to_vec();
    let (nb, ci_n) = (ishape[0], ishape[1]);
    let (xi, yi, zi) = (ishape[2], ishape[3], ishape[4]);
    let co_n = spec.out_channels;
    let [kx_n, ky_n, kz_n] = spec.kernel;
    let xo = spec.out_extent(xi, 0)?;
    let yo = spec.out_extent(yi, 1)?;
    let zo = spec.out_extent(zi, 2)?;

    let at_in = |n: usize, c: usize, x: usize, y: usize, z: usize| {
        input.data()[(((n * ci_n + c) * xi + x) * yi + y) * zi + z]
    };
    let at_w = |co: usize, ci: usize, kx: usize, ky: usize, kz: usize| {
        weights.data()[(((co * ci_n + ci) * kx_n + kx) * ky_n + ky) * kz_n + kz]
    };

    let mut out = Tensor::zeros(&[nb, co_n, xo, yo, zo]);
    for n in 0..nb {
        for co in 0..co_n {
            for ox in 0..xo {
                for oy in 0..yo {
                    for oz in 0..zo {
                        let mut acc = T::zero();
                        for ci in 0..ci_n {
                            for kx in 0..kx_n {
                                for ky in 0..ky_n {
                                    for kz in 0..kz_n {
                                        let ix = (ox * spec.stride + kx * spec.dilation) as isize
                                            - spec.padding[0] as isize;
                                        let iy = (oy * spec.stride + ky * spec.dilation) as isize
                                            - spec.padding[1] as isize;
                                        let iz = (oz * spec.stride + kz * spec.dilation) as isize
                                            - spec.padding[2] as isize;
                                        if ix < 0
                                            || iy < 0
                                            || iz < 0
                                            || ix >= xi as isize
                                            || iy >= yi as isize
                                            || iz >= zi as isize
                                        {
                                            continue;
                                        }
                                        acc = acc
                                            + at_w(co, ci, kx, ky, kz)
                                                * at_in(
                                                    n,
                                                    ci,
                                                    ix as usize,
                                                    iy as usize,
                                                    iz as usize,
                                                );
                                    }
                                }
                            }
                        }
                        out.data_mut()[(((n * co_n + co) * xo + ox) * yo + oy) * zo + oz] = acc;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Per-element max pooling over `2x2x2` windows at stride 2, written as a
/// direct scan over each window. Odd extents replicate the last plane, so
/// output extents are `ceil(in / 2)`.
pub fn naive_maxpool2<T: Element>(input: &Tensor<T>) -> Result<Tensor<T>> {
    let s = input.shape().to_vec();
    let (nb, cn) = (s[0], s[1]);
    let (xi, yi, zi) = (s[2], s[3], s[4]);
    let (xo, yo, zo) = ((xi + 1) / 2, (yi + 1) / 2, (zi + 1) / 2);
    let mut out = Tensor::zeros(&[nb, cn, xo, yo, zo]);
    for n in 0..nb {
        for c in 0..cn {
            for ox in 0..xo {
                for oy in 0..yo {
                    for oz in 0..zo {
                        let mut best: Option<T> = None;
                        for dx in 0..2 {
                            for dy in 0..2 {
                                for dz in 0..2 {
                                    let x = (2 * ox + dx).min(xi - 1);
                                    let y = (2 * oy + dy).min(yi - 1);
                                    let z = (2 * oz + dz).min(zi - 1);
                                    let v =
                                        input.data()[(((n * cn + c) * xi + x) * yi + y) * zi + z];
                                    best = Some(match best {
                                        None => v,
                                        Some(b) if v > b => v,
                                        Some(b) => b,
                                    });
                                }
                            }
                        }
                        out.data_mut()[(((n * cn + c) * xo + ox) * yo + oy) * zo + oz] =
                            best.unwrap();
                    }
                }
            }
        }
    }
    Ok(out)
}
