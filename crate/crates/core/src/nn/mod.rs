//! The numerical engine: layer kernels, network container, loss, optimizer
//! and gradient verification.
//!
//! All parameters and activations are `f32`. Losses and anything averaged
//! over many samples are accumulated in `f64`. Every reduction runs in
//! ascending index order so results are bitwise reproducible.

mod adam;
mod feature_map;
mod gradcheck;
mod init;
mod layers;
mod loss;
mod network;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use feature_map::FeatureMap;
pub use gradcheck::{grad_check, grad_check_against, GradCheckReport};
pub use init::init_network;
pub use layers::{
    conv1d_backward, conv1d_forward, dense_backward, dense_forward, relu_backward, relu_forward,
    Conv1d, ConvGrads, Dense, DenseGrads,
};
pub use loss::{softmax_cross_entropy, SoftmaxOutput};
pub(crate) use network::argmax;
pub use network::{count_params, Architecture, Layer, LayerSpec, Network, Shape};
