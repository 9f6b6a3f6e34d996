use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{Architecture, Layer, Network};
use crate::Result;

/// Builds a network with uniform variance-scaled weights and zero biases.
///
/// A parametric layer followed by ReLU gets He-uniform weights
/// (`limit = sqrt(6 / fan_in)`); any other parametric layer, which in practice
/// is the output layer, gets Glorot-uniform (`limit = sqrt(6 / (fan_in + fan_out))`).
/// Weights are drawn in canonical parameter order from a ChaCha8 stream
/// seeded with `seed`.
pub fn init_network(arch: &Architecture, seed: u64) -> Result<Network> {
    let mut net = Network::zeros(arch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = net.params();
    let mut offset = 0;
    for (idx, layer) in net.layers().iter().enumerate() {
        let (fan_in, fan_out, n_weights) = match layer {
            Layer::Conv1d(c) => (c.kernel_size * c.in_channels, c.kernel_size * c.filters, c.weights.len()),
            Layer::Dense(d) => (d.in_dim, d.out_dim, d.weights.len()),
            _ => continue,
        };
        let followed_by_relu = matches!(net.layers().get(idx + 1), Some(Layer::Relu));
        let limit = if followed_by_relu {
            libm::sqrtf(6.0 / fan_in as f32)
        } else {
            libm::sqrtf(6.0 / (fan_in + fan_out) as f32)
        };
        for w in &mut params[offset..offset + n_weights] {
            *w = rng.random_range(-limit..limit);
        }
        offset += layer.param_count();
    }
    net.set_params(&params)?;
    Ok(net)
}
