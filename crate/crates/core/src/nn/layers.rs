//! Layer kernels.
//!
//! Convolutions are cross-correlations with same-zero padding: output
//! position `i` reads input positions `i + k - kernel_size / 2`, and
//! positions outside the sequence count as zero, so the output length always
//! equals the input length.

use alloc::vec;
use alloc::vec::Vec;

use super::FeatureMap;
use crate::error::invalid;
use crate::Result;

/// 1D convolution with same-zero padding.
///
/// `weights` is laid out `filters × kernel_size × in_channels`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    pub filters: usize,
    pub kernel_size: usize,
    pub in_channels: usize,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

impl Conv1d {
    pub fn zeros(filters: usize, kernel_size: usize, in_channels: usize) -> Self {
        Self {
            filters,
            kernel_size,
            in_channels,
            weights: vec![0.0; filters * kernel_size * in_channels],
            bias: vec![0.0; filters],
        }
    }

    pub fn param_count(&self) -> usize {
        self.filters * self.kernel_size * self.in_channels + self.filters
    }

    #[inline]
    fn weight(&self, f: usize, k: usize, c: usize) -> f32 {
        self.weights[(f * self.kernel_size + k) * self.in_channels + c]
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != self.filters * self.kernel_size * self.in_channels {
            return Err(invalid!(
                "conv weights: expected {} values, got {}",
                self.filters * self.kernel_size * self.in_channels,
                self.weights.len()
            ));
        }
        if self.bias.len() != self.filters {
            return Err(invalid!(
                "conv bias: expected {} values, got {}",
                self.filters,
                self.bias.len()
            ));
        }
        Ok(())
    }

    /// Range of kernel taps that land inside a sequence of `length` for
    /// output position `i`.
    #[inline]
    fn taps(&self, i: usize, length: usize) -> core::ops::Range<usize> {
        let half = self.kernel_size / 2;
        // tap k reads position i + k - half
        let lo = half.saturating_sub(i);
        let hi = (length + half - i).min(self.kernel_size);
        lo..hi
    }
}

/// Fully connected layer. `weights` is `in_dim × out_dim`, row-major, so
/// `weights[i * out_dim + j]` connects input `i` to output `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

impl Dense {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weights: vec![0.0; in_dim * out_dim], bias: vec![0.0; out_dim] }
    }

    pub fn param_count(&self) -> usize {
        self.in_dim * self.out_dim + self.out_dim
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != self.in_dim * self.out_dim || self.bias.len() != self.out_dim {
            return Err(invalid!(
                "dense {}x{}: parameter buffers have {} weights and {} biases",
                self.in_dim,
                self.out_dim,
                self.weights.len(),
                self.bias.len()
            ));
        }
        Ok(())
    }
}

pub fn conv1d_forward(input: &FeatureMap, layer: &Conv1d) -> Result<FeatureMap> {
    layer.check()?;
    if input.channels() != layer.in_channels {
        return Err(invalid!(
            "conv input channels: layer expects {}, input has {}",
            layer.in_channels,
            input.channels()
        ));
    }
    let out = conv_forward_raw(input.as_slice(), input.length(), layer);
    Ok(FeatureMap::from_raw(input.length(), layer.filters, out))
}

/// Per output element: start at the bias, then add taps in ascending
/// `(k, c)` order.
pub(crate) fn conv_forward_raw(x: &[f32], length: usize, layer: &Conv1d) -> Vec<f32> {
    let cin = layer.in_channels;
    let half = layer.kernel_size / 2;
    let mut out = vec![0.0f32; length * layer.filters];
    for i in 0..length {
        let taps = layer.taps(i, length);
        for f in 0..layer.filters {
            let mut acc = layer.bias[f];
            for k in taps.clone() {
                let row = &x[(i + k - half) * cin..(i + k - half + 1) * cin];
                let w = &layer.weights[(f * layer.kernel_size + k) * cin..][..cin];
                for c in 0..cin {
                    acc += w[c] * row[c];
                }
            }
            out[i * layer.filters + f] = acc;
        }
    }
    out
}

/// Gradients of a convolution with respect to its input and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub input: FeatureMap,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

pub fn conv1d_backward(
    grad_out: &FeatureMap,
    cached_input: &FeatureMap,
    layer: &Conv1d,
) -> Result<ConvGrads> {
    layer.check()?;
    if cached_input.channels() != layer.in_channels {
        return Err(invalid!(
            "conv cached input channels: layer expects {}, got {}",
            layer.in_channels,
            cached_input.channels()
        ));
    }
    if grad_out.length() != cached_input.length() {
        return Err(invalid!(
            "conv grad_out length {} does not match input length {}",
            grad_out.length(),
            cached_input.length()
        ));
    }
    if grad_out.channels() != layer.filters {
        return Err(invalid!(
            "conv grad_out channels: expected {} filters, got {}",
            layer.filters,
            grad_out.channels()
        ));
    }
    let mut weights = vec![0.0; layer.weights.len()];
    let mut bias = vec![0.0; layer.filters];
    let input = conv_backward_raw(
        grad_out.as_slice(),
        cached_input.as_slice(),
        cached_input.length(),
        layer,
        &mut weights,
        &mut bias,
    );
    Ok(ConvGrads { input: FeatureMap::from_raw(cached_input.length(), layer.in_channels, input), weights, bias })
}

/// Adds parameter gradients into `grad_w`/`grad_b` and returns the input
/// gradient.
pub(crate) fn conv_backward_raw(
    g: &[f32],
    x: &[f32],
    length: usize,
    layer: &Conv1d,
    grad_w: &mut [f32],
    grad_b: &mut [f32],
) -> Vec<f32> {
    let cin = layer.in_channels;
    let half = layer.kernel_size / 2;
    let mut grad_x = vec![0.0f32; length * cin];
    for i in 0..length {
        let taps = layer.taps(i, length);
        for f in 0..layer.filters {
            let go = g[i * layer.filters + f];
            grad_b[f] += go;
            for k in taps.clone() {
                let j = i + k - half;
                let base = (f * layer.kernel_size + k) * cin;
                for c in 0..cin {
                    grad_w[base + c] += go * x[j * cin + c];
                    grad_x[j * cin + c] += go * layer.weight(f, k, c);
                }
            }
        }
    }
    grad_x
}

pub fn dense_forward(input: &[f32], layer: &Dense) -> Result<Vec<f32>> {
    layer.check()?;
    if input.len() != layer.in_dim {
        return Err(invalid!(
            "dense input length: layer expects {}, got {}",
            layer.in_dim,
            input.len()
        ));
    }
    Ok(dense_forward_raw(input, layer))
}

pub(crate) fn dense_forward_raw(x: &[f32], layer: &Dense) -> Vec<f32> {
    let mut out = layer.bias.clone();
    for (i, &xi) in x.iter().enumerate() {
        let row = &layer.weights[i * layer.out_dim..(i + 1) * layer.out_dim];
        for (o, &w) in out.iter_mut().zip(row) {
            *o += w * xi;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads {
    pub input: Vec<f32>,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

pub fn dense_backward(grad_out: &[f32], cached_input: &[f32], layer: &Dense) -> Result<DenseGrads> {
    layer.check()?;
    if cached_input.len() != layer.in_dim {
        return Err(invalid!(
            "dense cached input length: expected {}, got {}",
            layer.in_dim,
            cached_input.len()
        ));
    }
    if grad_out.len() != layer.out_dim {
        return Err(invalid!(
            "dense grad_out length: expected {}, got {}",
            layer.out_dim,
            grad_out.len()
        ));
    }
    let mut weights = vec![0.0; layer.weights.len()];
    let mut bias = vec![0.0; layer.out_dim];
    let input = dense_backward_raw(grad_out, cached_input, layer, &mut weights, &mut bias);
    Ok(DenseGrads { input, weights, bias })
}

pub(crate) fn dense_backward_raw(
    g: &[f32],
    x: &[f32],
    layer: &Dense,
    grad_w: &mut [f32],
    grad_b: &mut [f32],
) -> Vec<f32> {
    for (b, &go) in grad_b.iter_mut().zip(g) {
        *b += go;
    }
    let mut grad_x = vec![0.0f32; layer.in_dim];
    for (i, &xi) in x.iter().enumerate() {
        let row = &layer.weights[i * layer.out_dim..(i + 1) * layer.out_dim];
        let grow = &mut grad_w[i * layer.out_dim..(i + 1) * layer.out_dim];
        let mut acc = 0.0f32;
        for j in 0..layer.out_dim {
            grow[j] += xi * g[j];
            acc += row[j] * g[j];
        }
        grad_x[i] = acc;
    }
    grad_x
}

pub fn relu_forward(input: &[f32]) -> Vec<f32> {
    input.iter().map(|&x| if x > 0.0 { x } else { 0.0 }).collect()
}

/// Passes the upstream gradient where the forward input was positive.
pub fn relu_backward(grad_out: &[f32], cached_input: &[f32]) -> Result<Vec<f32>> {
    if grad_out.len() != cached_input.len() {
        return Err(invalid!(
            "relu grad_out length {} does not match input length {}",
            grad_out.len(),
            cached_input.len()
        ));
    }
    Ok(grad_out
        .iter()
        .zip(cached_input)
        .map(|(&g, &x)| if x > 0.0 { g } else { 0.0 })
        .collect())
}
