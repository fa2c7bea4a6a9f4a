//! Max pooling over `2x2x2` windows at stride 2 with recorded argmax
//! positions, so the backward pass routes each gradient to the element that
//! produced the maximum.
//!
//! Odd spatial extents are handled by replicating the last plane, so the
//! output extent is `ceil(in / 2)` per axis. Replicated reads resolve to the
//! original element, and ties go to the first contributing element in
//! `(x, y, z)` scan order.

use crate::error::{Result, TensorError};
use crate::tensor::{Element, Tensor};

pub struct PoolIndices {
    /// Flat input index chosen for each flat output index.
    pub argmax: Vec<usize>,
    pub in_shape: Vec<usize>,
}

pub fn maxpool2_forward<T: Element>(input: &Tensor<T>) -> Result<(Tensor<T>, PoolIndices)> {
    let s = input.shape();
    if s.len() != 5 {
        return Err(TensorError::ShapeMismatch(format!(
            "maxpool input must be (N, C, X, Y, Z), got {:?}",
            s
        )));
    }
    let (nb, cn, xi, yi, zi) = (s[0], s[1], s[2], s[3], s[4]);
    if xi == 0 || yi == 0 || zi == 0 {
        return Err(TensorError::ShapeMismatch(
            "maxpool needs nonzero spatial extents".into(),
        ));
    }
    let (xo, yo, zo) = ((xi + 1) / 2, (yi + 1) / 2, (zi + 1) / 2);
    let mut out = Tensor::zeros(&[nb, cn, xo, yo, zo]);
    let mut argmax = vec![0usize; out.len()];
    let data = input.data();
    let out_data = out.data_mut();

    let mut o = 0usize;
    for n in 0..nb {
        for c in 0..cn {
            let base = (n * cn + c) * xi * yi * zi;
            for ox in 0..xo {
                for oy in 0..yo {
                    for oz in 0..zo {
                        let mut best_idx = usize::MAX;
                        let mut best = T::neg_infinity();
                        for dx in 0..2usize {
                            let x = (2 * ox + dx).min(xi - 1);
                            for dy in 0..2usize {
                                let y = (2 * oy + dy).min(yi - 1);
                                for dz in 0..2usize {
                                    let z = (2 * oz + dz).min(zi - 1);
                                    let idx = base + (x * yi + y) * zi + z;
                                    let v = data[idx];
                                    if best_idx == usize::MAX || v > best {
                                        best = v;
                                        best_idx = idx;
                                    }
                                }
                            }
                        }
                        out_data[o] = best;
                        argmax[o] = best_idx;
                        o += 1;
                    }
                }
            }
        }
    }
    Ok((
        out,
        PoolIndices {
            argmax,
            in_shape: s.to_vec(),
        },
    ))
}

pub fn maxpool2_backward<T: Element>(
    grad_out: &Tensor<T>,
    indices: &PoolIndices,
) -> Result<Tensor<T>> {
    if grad_out.len() != indices.argmax.len() {
        return Err(TensorError::ShapeMismatch(format!(
            "maxpool grad_out has {} elements, forward produced {}",
            grad_out.len(),
            indices.argmax.len()
        )));
    }
    let mut grad_in = Tensor::zeros(&indices.in_shape);
    let gi = grad_in.data_mut();
    for (o, &idx) in indices.argmax.iter().enumerate() {
        gi[idx] = gi[idx] + grad_out.data()[o];
    }
    Ok(grad_in)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_window_maxima() {
        let data: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let input = Tensor::from_vec(&[1, 1, 2, 2, 2], data).unwrap();
        let (out, idx) = maxpool2_forward(&input).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1, 1, 1]);
        assert_eq!(out.data(), &[7.0]);
        assert_eq!(idx.argmax, vec![7]);
    }

    #[test]
    fn constant_input_stays_constant() {
        let input = Tensor::full(&[1, 2, 4, 4, 4], 1.5f64);
        let (out, _) = maxpool2_forward(&input).unwrap();
        assert_eq!(out.shape(), &[1, 2, 2, 2, 2]);
        assert!(out.data().iter().all(|&v| v == 1.5));
    }

    #[test]
    fn increasing_ramp_selects_last_corner() {
        let data: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let input = Tensor::from_vec(&[1, 1, 4, 4, 4], data).unwrap();
        let (out, idx) = maxpool2_forward(&input).unwrap();
        for (o, &src) in idx.argmax.iter().enumerate() {
            let (ox, oy, oz) = (o / 4, (o / 2) % 2, o % 2);
            let want = ((2 * ox + 1) * 4 + 2 * oy + 1) * 4 + 2 * oz + 1;
            assert_eq!(src, want);
            assert_eq!(out.data()[o], want as f64);
        }
    }

    #[test]
    fn odd_extents_replicate_the_last_plane() {
        // z extent 3 pools to 2: windows {0,1} and {2,2(replicated)}
        let input = Tensor::from_vec(&[1, 1, 1, 1, 3], vec![1.0f64, 5.0, 2.0]).unwrap();
        let (out, idx) = maxpool2_forward(&input).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1, 1, 2]);
        assert_eq!(out.data(), &[5.0, 2.0]);
        assert_eq!(idx.argmax, vec![1, 2]);
    }

    #[test]
    fn backward_routes_to_argmax_only() {
        let data = vec![1.0, 9.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let input = Tensor::from_vec(&[1, 1, 2, 2, 2], data).unwrap();
        let (_, idx) = maxpool2_forward(&input).unwrap();
        let go = Tensor::from_vec(&[1, 1, 1, 1, 1], vec![2.5]).unwrap();
        let gi = maxpool2_backward(&go, &idx).unwrap();
        let mut want = vec![0.0; 8];
        want[1] = 2.5;
        assert_eq!(gi.data(), &want[..]);
    }

    #[test]
    fn ties_take_first_in_scan_order() {
        let input = Tensor::from_vec(&[1, 1, 2, 2, 2], vec![5.0; 8]).unwrap();
        let (_, idx) = maxpool2_forward(&input).unwrap();
        assert_eq!(idx.argmax, vec![0]);
    }

    #[test]
    fn matches_reference_on_random_shapes() {
        use crate::reference::naive_maxpool2;
        let mut v = 0.7f64;
        for shape in [[2, 3, 4, 6, 8], [1, 2, 5, 3, 7], [1, 1, 6, 6, 1]] {
            let len: usize = shape.iter().product();
            let data: Vec<f64> = (0..len)
                .map(|_| {
                    v = (v * 997.0 + 0.1).fract();
                    v
                })
                .collect();
            let input = Tensor::from_vec(&shape, data).unwrap();
            let (fast, _) = maxpool2_forward(&input).unwrap();
            let slow = naive_maxpool2(&input).unwrap();
            assert_eq!(fast.data(), slow.data());
        }
    }
}
