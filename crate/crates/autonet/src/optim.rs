//! Stochastic gradient descent with classical momentum:
//! `v <- mu * v + g`, `w <- w - lr * v`. The caller owns one velocity buffer
//! per parameter block, zero-initialized.

use crate::error::{Result, TensorError};
use crate::tensor::Element;

#[derive(Clone, Copy, Debug)]
pub struct Sgd {
    pub lr: f64,
    pub momentum: f64,
}

impl Sgd {
    pub fn new(lr: f64, momentum: f64) -> Self {
        Sgd { lr, momentum }
    }

    pub fn step<T: Element>(
        &self,
        params: &mut [T],
        grads: &[T],
        velocity: &mut [T],
    ) -> Result<()> {
        if params.len() != grads.len() || params.len() != velocity.len() {
            return Err(TensorError::ShapeMismatch(format!(
                "sgd buffers disagree: {} params, {} grads, {} velocity",
                params.len(),
                grads.len(),
                velocity.len()
            )));
        }
        let mu = T::from_f64(self.momentum);
        let lr = T::from_f64(self.lr);
        for ((w, &g), v) in params.iter_mut().zip(grads).zip(velocity.iter_mut()) {
            *v = mu * *v + g;
            *w = *w - lr * *v;
        }
        Ok(())
    }
}
