//! Minimal differentiable compute engine for dense float tensors: 3D
//! convolution with dilation, pooling, trilinear resampling, channel
//! concatenation, activations, losses, SGD, finite-difference gradient
//! checking, and a parameter checkpoint format.
//!
//! Every op comes in a forward/backward pair where the backward is the exact
//! adjoint of the forward, so analytic gradients can be validated against
//! central differences in f64. All kernels are single-threaded with a fixed
//! accumulation order: identical inputs give bit-identical outputs.

pub mod activate;
pub mod checkpoint;
pub mod concat;
pub mod conv;
pub mod error;
pub mod gradcheck;
pub mod loss;
pub mod norm;
pub mod optim;
pub mod pool;
pub mod reference;
pub mod resample;
pub mod tensor;

pub use conv::{conv3_backward, conv3_forward, ConvSpec};
pub use error::{Result, TensorError};
pub use loss::{soft_dice_loss, softmax_ce, LossValue, DICE_EPS};
pub use tensor::{Element, Tensor};

/// Flush subnormal floats to zero for the calling process.
///
/// Converged training pushes saturated softmax gradients into the subnormal
/// range, where x86 falls back to microcode assists and the whole backward
/// pass runs several times slower. Values that small carry no signal here,
/// so binaries that train or infer should call this once at startup.
pub fn flush_subnormals() {
    #[cfg(target_arch = "x86_64")]
    unsafe {
        use std::arch::x86_64::{_mm_getcsr, _mm_setcsr};
        // MXCSR bit 15: flush-to-zero; bit 6: denormals-are-zero.
        _mm_setcsr(_mm_getcsr() | (1 << 15) | (1 << 6));
    }
}
