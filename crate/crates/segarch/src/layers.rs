//! Convolution layers with He-normal init and a cached forward trace, the
//! building block of both networks.

use autonet::activate::{add_channel_bias, channel_bias_backward, relu, relu_backward};
use autonet::norm::{group_norm_backward, group_norm_forward, NormTrace};
use autonet::{conv3_backward, conv3_forward, ConvSpec, Element, Tensor};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// Standard normal draw via Box-Muller on the seeded stream.
pub fn normal_sample(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..=1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[derive(Clone, Debug)]
pub struct ConvLayer<T: Element> {
    pub name: String,
    pub spec: ConvSpec,
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Everything the backward pass needs from one layer's forward pass.
pub struct LayerTrace<T: Element> {
    input: Tensor<T>,
    pre_act: Tensor<T>,
    norm: Option<NormTrace<T>>,
}

/// Gradients mirroring one layer's parameters.
pub struct LayerGrads<T: Element> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Element> ConvLayer<T> {
    /// He-normal weights (std = sqrt(2 / fan_in)), zero bias.
    pub fn init(name: &str, spec: ConvSpec, rng: &mut ChaCha8Rng) -> Result<Self> {
        spec.validate()?;
        let fan_in = (spec.in_channels * spec.kernel.iter().product::<usize>()) as f64;
        let std = (2.0 / fan_in).sqrt();
        let data: Vec<T> = (0..spec.weight_count())
            .map(|_| T::from_f64(normal_sample(rng) * std))
            .collect();
        let weight = Tensor::from_vec(&spec.weight_shape(), data)?;
        let bias = Tensor::zeros(&[spec.out_channels]);
        Ok(ConvLayer {
            name: name.to_string(),
            spec,
            weight,
            bias,
        })
    }

    /// conv -> bias -> optional per-group normalization -> optional relu.
    pub fn forward(
        &self,
        input: &Tensor<T>,
        norm_groups: usize,
        relu_on: bool,
    ) -> Result<(Tensor<T>, LayerTrace<T>)> {
        let conv = conv3_forward(input, &self.weight, &self.spec)?;
        let biased = add_channel_bias(&conv, self.bias.data())?;
        let (pre_act, norm) = if norm_groups > 0 {
            let (normed, trace) = group_norm_forward(&biased, norm_groups, 1e-5)?;
            (normed, Some(trace))
        } else {
            (biased, None)
        };
        let out = if relu_on { relu(&pre_act) } else { pre_act.clone() };
        Ok((
            out,
            LayerTrace {
                input: input.clone(),
                pre_act,
                norm,
            },
        ))
    }

    /// Same math as `forward` without retaining a trace; inference-only, so
    /// large inputs don't hold backward state alive.
    pub fn infer(&self, input: &Tensor<T>, norm_groups: usize, relu_on: bool) -> Result<Tensor<T>> {
        let conv = conv3_forward(input, &self.weight, &self.spec)?;
        let biased = add_channel_bias(&conv, self.bias.data())?;
        let pre_act = if norm_groups > 0 {
            group_norm_forward(&biased, norm_groups, 1e-5)?.0
        } else {
            biased
        };
        Ok(if relu_on { relu(&pre_act) } else { pre_act })
    }

    pub fn backward(
        &self,
        trace: &LayerTrace<T>,
        grad_out: &Tensor<T>,
        relu_on: bool,
    ) -> Result<(Tensor<T>, LayerGrads<T>)> {
        let grad_pre = if relu_on {
            relu_backward(grad_out, &trace.pre_act)?
        } else {
            grad_out.clone()
        };
        let grad_biased = match &trace.norm {
            Some(nt) => group_norm_backward(&grad_pre, nt)?,
            None => grad_pre,
        };
        let bias_grad = channel_bias_backward(&grad_biased)?;
        let (grad_in, grad_w) =
            conv3_backward(&grad_biased, &trace.input, &self.weight, &self.spec)?;
        Ok((
            grad_in,
            LayerGrads {
                weight: grad_w,
                bias: Tensor::from_vec(&[self.spec.out_channels], bias_grad)?,
            },
        ))
    }

    pub fn param_count(&self) -> usize {
        self.spec.weight_count() + self.spec.out_channels
    }
}

/// Run a stack of same-resolution layers (relu on every one).
pub fn stage_forward<T: Element>(
    layers: &[ConvLayer<T>],
    input: &Tensor<T>,
    norm_groups: usize,
) -> Result<(Tensor<T>, Vec<LayerTrace<T>>)> {
    let mut x = input.clone();
    let mut traces = Vec::with_capacity(layers.len());
    for layer in layers {
        let (y, t) = layer.forward(&x, norm_groups, true)?;
        traces.push(t);
        x = y;
    }
    Ok((x, traces))
}

/// Trace-free `stage_forward` for inference.
pub fn stage_infer<T: Element>(
    layers: &[ConvLayer<T>],
    input: &Tensor<T>,
    norm_groups: usize,
) -> Result<Tensor<T>> {
    let mut x = input.clone();
    for layer in layers {
        x = layer.infer(&x, norm_groups, true)?;
    }
    Ok(x)
}

/// Mirror of `stage_forward`; returns the input gradient and per-layer
/// parameter gradients in layer order.
pub fn stage_backward<T: Element>(
    layers: &[ConvLayer<T>],
    traces: &[LayerTrace<T>],
    grad_out: &Tensor<T>,
) -> Result<(Tensor<T>, Vec<LayerGrads<T>>)> {
    let mut grad = grad_out.clone();
    let mut grads: Vec<Option<LayerGrads<T>>> = (0..layers.len()).map(|_| None).collect();
    for i in (0..layers.len()).rev() {
        let (g_in, g_params) = layers[i].backward(&traces[i], &grad, true)?;
        grads[i] = Some(g_params);
        grad = g_in;
    }
    Ok((grad, grads.into_iter().map(|g| g.unwrap()).collect()))
}
