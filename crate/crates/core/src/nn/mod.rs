//! Convolutional classifier built from scratch: forward and backward passes
//! for each layer, binary cross-entropy, SGD training and gradient checking.

mod activation;
mod conv;
mod dense;
pub mod gradcheck;
mod loss;
mod model;
mod pool;
mod tensor;
mod train;

pub use activation::{relu, sigmoid, Activation};
pub use conv::{conv2d_backward, conv2d_forward, ConvGrads, ConvLayer};
pub use dense::{dense_backward, dense_forward, dense_pre_activation, DenseGrads, DenseLayer};
pub use gradcheck::gradient_check;
pub use loss::{bce, BCE_EPSILON};
pub use model::{Architecture, ForwardTrace, InputSpec, Model, ModelGrads};
pub use pool::{maxpool2d_backward, maxpool2d_forward, ArgmaxMap, PoolSpec};
pub use tensor::Tensor;
pub use train::{evaluate, split_dataset, train, train_epoch, Metrics, Sample, TrainConfig};

/// Glorot/Xavier uniform bound.
pub(crate) fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
