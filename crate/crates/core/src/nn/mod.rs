//! From-scratch trainable CNN with exact-gradient backpropagation.
//!
//! The layer stack is fixed: four `Conv-ReLU-MaxPool` blocks (32/48/64/96
//! filters) with dropout after the second and fourth pools, then
//! `Flatten → Dense-256 → ReLU → Dropout → Dense-2`. [`ops`] holds the layer
//! primitives (each with an analytic backward pass), [`model`] wires them
//! into that stack, [`optim`] implements SGD and Adam, and [`train`] runs the
//! seeded mini-batch loop.
//!
//! Everything is generic over `f32`/`f64`: training runs at `f32` for
//! throughput, while gradient-vs-finite-difference tests instantiate the same
//! code at `f64`.

pub mod model;
pub mod ops;
pub mod optim;
pub mod train;

pub use model::{batch_gradients, forward_eval, forward_train, predict, ForwardCache, Grads, ModelSpec, Params};
pub use ops::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, dropout_backward,
    dropout_forward, maxpool2d_backward, maxpool2d_forward, relu_backward, relu_forward,
    softmax_cross_entropy, softmax_cross_entropy_backward,
};
pub use optim::{adam_step, sgd_step, AdamState, Optimizer};
pub use train::{train, EpochStats, TrainConfig};

use alloc::string::String;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum NnError {
    /// Operand shapes are inconsistent with the operation or the model spec.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// Max-pooling requires even spatial dimensions.
    #[error("pooling requires even dimensions, got {height}x{width}")]
    OddDimension { height: usize, width: usize },
    /// The model spec itself is invalid.
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    /// Training was asked to run on no samples.
    #[error("empty dataset")]
    EmptyDataset,
    /// The loss became NaN/Inf; reported with the position of the divergence.
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
}
