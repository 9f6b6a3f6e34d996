use alloc::vec;
use alloc::vec::Vec;

use super::layers::{
    conv_backward_raw, conv_forward_raw, dense_backward_raw, dense_forward_raw, relu_forward,
    Conv1d, Dense,
};
use super::loss::{softmax_cross_entropy, softmax_f64};
use super::FeatureMap;
use crate::error::invalid;
use crate::{Error, Result, NUM_CLASSES, NUM_SENSORS};

/// Shape of the activation flowing between two layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Map { length: usize, channels: usize },
    Vector(usize),
}

impl Shape {
    pub fn len(self) -> usize {
        match self {
            Shape::Map { length, channels } => length * channels,
            Shape::Vector(n) => n,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }
}

/// One entry of an architecture descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Conv1d { filters: usize, kernel_size: usize },
    Relu,
    Flatten,
    Dense { units: usize },
    Softmax,
}

/// Layer stack plus input shape. Parameter shapes are implied by the input
/// shape and each layer's sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub input_length: usize,
    pub input_channels: usize,
    pub layers: Vec<LayerSpec>,
}

impl Architecture {
    /// Conv(16, k3) → ReLU → Conv(24, k3) → ReLU → Flatten → Dense(28) →
    /// ReLU → Dense(4) → Softmax over a 6×1 input: 5,416 parameters.
    pub fn reference_cnn() -> Self {
        use LayerSpec::*;
        Self {
            input_length: NUM_SENSORS,
            input_channels: 1,
            layers: vec![
                Conv1d { filters: 16, kernel_size: 3 },
                Relu,
                Conv1d { filters: 24, kernel_size: 3 },
                Relu,
                Flatten,
                Dense { units: 28 },
                Relu,
                Dense { units: NUM_CLASSES },
                Softmax,
            ],
        }
    }

    /// Dense 6→128 → ReLU → 128→64 → ReLU → 64→4 → Softmax: 9,412 parameters.
    pub fn reference_mlp() -> Self {
        use LayerSpec::*;
        Self {
            input_length: NUM_SENSORS,
            input_channels: 1,
            layers: vec![
                Flatten,
                Dense { units: 128 },
                Relu,
                Dense { units: 64 },
                Relu,
                Dense { units: NUM_CLASSES },
                Softmax,
            ],
        }
    }

    /// Input shape of every layer followed by the final output shape.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        if self.input_length == 0 || self.input_channels == 0 {
            return Err(invalid!("input shape must be positive"));
        }
        let mut shape = Shape::Map { length: self.input_length, channels: self.input_channels };
        let mut shapes = Vec::with_capacity(self.layers.len() + 1);
        shapes.push(shape);
        for (idx, spec) in self.layers.iter().enumerate() {
            shape = match (*spec, shape) {
                (LayerSpec::Conv1d { filters, kernel_size }, Shape::Map { length, .. }) => {
                    if filters == 0 || kernel_size == 0 {
                        return Err(invalid!("layer {idx}: conv filters and kernel_size must be positive"));
                    }
                    Shape::Map { length, channels: filters }
                }
                (LayerSpec::Conv1d { .. }, Shape::Vector(_)) => {
                    return Err(invalid!("layer {idx}: conv1d needs a feature map input"))
                }
                (LayerSpec::Relu, s) => s,
                (LayerSpec::Flatten, Shape::Map { length, channels }) => Shape::Vector(length * channels),
                (LayerSpec::Flatten, Shape::Vector(_)) => {
                    return Err(invalid!("layer {idx}: flatten needs a feature map input"))
                }
                (LayerSpec::Dense { units }, Shape::Vector(_)) => {
                    if units == 0 {
                        return Err(invalid!("layer {idx}: dense units must be positive"));
                    }
                    Shape::Vector(units)
                }
                (LayerSpec::Dense { .. }, Shape::Map { .. }) => {
                    return Err(invalid!("layer {idx}: dense needs a flattened input"))
                }
                (LayerSpec::Softmax, Shape::Vector(n)) => {
                    if idx + 1 != self.layers.len() {
                        return Err(invalid!("layer {idx}: softmax must be the last layer"));
                    }
                    Shape::Vector(n)
                }
                (LayerSpec::Softmax, Shape::Map { .. }) => {
                    return Err(invalid!("layer {idx}: softmax needs a flattened input"))
                }
            };
            shapes.push(shape);
        }
        Ok(shapes)
    }

    /// Checks layer compatibility and that the stack ends in a softmax over
    /// the four activity classes.
    pub fn validate(&self) -> Result<Vec<Shape>> {
        if self.layers.is_empty() {
            return Err(invalid!("architecture has no layers"));
        }
        let shapes = self.shapes()?;
        if self.layers.last() != Some(&LayerSpec::Softmax) {
            return Err(invalid!("architecture must end with softmax"));
        }
        let out = *shapes.last().expect("non-empty");
        if out != Shape::Vector(NUM_CLASSES) {
            return Err(invalid!("output must have {NUM_CLASSES} classes, got {}", out.len()));
        }
        Ok(shapes)
    }

    /// Sum of weight and bias element counts. Zero for an empty stack.
    pub fn count_params(&self) -> Result<usize> {
        let shapes = self.shapes()?;
        Ok(self
            .layers
            .iter()
            .zip(&shapes)
            .map(|(spec, input)| match (*spec, *input) {
                (LayerSpec::Conv1d { filters, kernel_size }, Shape::Map { channels, .. }) => {
                    filters * kernel_size * channels + filters
                }
                (LayerSpec::Dense { units }, Shape::Vector(n)) => n * units + units,
                _ => 0,
            })
            .sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv1d(Conv1d),
    Relu,
    Flatten,
    Dense(Dense),
    Softmax,
}

impl Layer {
    pub fn param_count(&self) -> usize {
        match self {
            Layer::Conv1d(c) => c.param_count(),
            Layer::Dense(d) => d.param_count(),
            _ => 0,
        }
    }

    /// Weights then bias, in the canonical flat order.
    fn param_slices(&self) -> Option<(&[f32], &[f32])> {
        match self {
            Layer::Conv1d(c) => Some((&c.weights, &c.bias)),
            Layer::Dense(d) => Some((&d.weights, &d.bias)),
            _ => None,
        }
    }

    fn param_slices_mut(&mut self) -> Option<(&mut [f32], &mut [f32])> {
        match self {
            Layer::Conv1d(c) => Some((&mut c.weights, &mut c.bias)),
            Layer::Dense(d) => Some((&mut d.weights, &mut d.bias)),
            _ => None,
        }
    }
}

/// An ordered layer stack with its cached activations.
///
/// [`Network::forward`] records each layer's input so that
/// [`Network::backward`] can run; [`Network::infer`] touches no cache and can
/// be called through a shared reference from many threads.
///
/// Parameters are exposed as one flat vector in canonical order: layers in
/// order, each layer's weights (row-major) followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: Architecture,
    shapes: Vec<Shape>,
    layers: Vec<Layer>,
    cache: Option<Vec<Vec<f32>>>,
}

impl Network {
    /// A network with every parameter set to zero.
    pub fn zeros(arch: &Architecture) -> Result<Self> {
        let shapes = arch.validate()?;
        let layers = arch
            .layers
            .iter()
            .zip(&shapes)
            .map(|(spec, input)| match (*spec, *input) {
                (LayerSpec::Conv1d { filters, kernel_size }, Shape::Map { channels, .. }) => {
                    Layer::Conv1d(Conv1d::zeros(filters, kernel_size, channels))
                }
                (LayerSpec::Dense { units }, Shape::Vector(n)) => Layer::Dense(Dense::zeros(n, units)),
                (LayerSpec::Relu, _) => Layer::Relu,
                (LayerSpec::Flatten, _) => Layer::Flatten,
                (LayerSpec::Softmax, _) => Layer::Softmax,
                _ => unreachable!("validated"),
            })
            .collect();
        Ok(Self { arch: arch.clone(), shapes, layers, cache: None })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Input shape of each layer, then the output shape.
    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn input_shape(&self) -> (usize, usize) {
        (self.arch.input_length, self.arch.input_channels)
    }

    pub fn count_params(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn params(&self) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.count_params());
        for (w, b) in self.layers.iter().filter_map(Layer::param_slices) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f32]) -> Result<()> {
        if params.len() != self.count_params() {
            return Err(invalid!(
                "parameter vector has {} values, network needs {}",
                params.len(),
                self.count_params()
            ));
        }
        let mut rest = params;
        for (w, b) in self.layers.iter_mut().filter_map(Layer::param_slices_mut) {
            let (head, tail) = rest.split_at(w.len());
            w.copy_from_slice(head);
            let (head, tail) = tail.split_at(b.len());
            b.copy_from_slice(head);
            rest = tail;
        }
        self.cache = None;
        Ok(())
    }

    /// Drops cached activations, leaving an inference-only network.
    pub fn clear_cache(&mut self) {
        self.cache = None;
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }

    fn check_input(&self, input: &FeatureMap) -> Result<()> {
        let (length, channels) = self.input_shape();
        if input.length() != length || input.channels() != channels {
            return Err(invalid!(
                "network expects a {length}x{channels} input, got {}x{}",
                input.length(),
                input.channels()
            ));
        }
        Ok(())
    }

    /// Runs every layer, returning the input of each layer followed by the
    /// final probabilities.
    fn propagate(&self, input: &FeatureMap) -> Result<Vec<Vec<f32>>> {
        self.check_input(input)?;
        let mut acts: Vec<Vec<f32>> = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.as_slice().to_vec());
        for (layer, shape) in self.layers.iter().zip(&self.shapes) {
            let x = acts.last().expect("non-empty");
            let y = match layer {
                Layer::Conv1d(conv) => {
                    let Shape::Map { length, .. } = *shape else { unreachable!("validated") };
                    conv_forward_raw(x, length, conv)
                }
                Layer::Dense(dense) => dense_forward_raw(x, dense),
                Layer::Relu => relu_forward(x),
                Layer::Flatten => x.clone(),
                Layer::Softmax => softmax_f64(x)?.0.iter().map(|&p| p as f32).collect(),
            };
            acts.push(y);
        }
        Ok(acts)
    }

    /// Forward pass that caches activations for [`Network::backward`].
    pub fn forward(&mut self, input: &FeatureMap) -> Result<Vec<f32>> {
        let acts = self.propagate(input)?;
        let probs = acts.last().expect("non-empty").clone();
        self.cache = Some(acts);
        Ok(probs)
    }

    /// Forward pass without touching the cache.
    pub fn infer(&self, input: &FeatureMap) -> Result<Vec<f32>> {
        let mut acts = self.propagate(input)?;
        Ok(acts.pop().expect("non-empty"))
    }

    /// Gradient of the cross-entropy loss of the last forward sample with
    /// respect to every parameter, in canonical order.
    pub fn backward(&mut self, target: usize) -> Result<Vec<f32>> {
        let mut grad = vec![0.0; self.count_params()];
        self.accumulate_gradient(target, &mut grad)?;
        Ok(grad)
    }

    /// Adds the gradient of the last forward sample into `grad` and returns
    /// that sample's loss.
    pub fn accumulate_gradient(&mut self, target: usize, grad: &mut [f32]) -> Result<f64> {
        if grad.len() != self.count_params() {
            return Err(invalid!(
                "gradient buffer has {} values, network needs {}",
                grad.len(),
                self.count_params()
            ));
        }
        let acts = self.cache.as_ref().ok_or(Error::State("backward called before forward"))?;
        let n = self.layers.len();
        let logits = &acts[n - 1];
        let fused = softmax_cross_entropy(logits, target)?;

        let mut offsets = Vec::with_capacity(n);
        let mut offset = 0;
        for layer in &self.layers {
            offsets.push(offset);
            offset += layer.param_count();
        }

        let mut upstream = fused.grad_logits;
        // the softmax layer is folded into the loss gradient above
        for idx in (0..n - 1).rev() {
            let x = &acts[idx];
            let off = offsets[idx];
            upstream = match &self.layers[idx] {
                Layer::Conv1d(conv) => {
                    let Shape::Map { length, .. } = self.shapes[idx] else { unreachable!("validated") };
                    let (gw, gb) = grad[off..off + conv.param_count()].split_at_mut(conv.weights.len());
                    conv_backward_raw(&upstream, x, length, conv, gw, gb)
                }
                Layer::Dense(dense) => {
                    let (gw, gb) = grad[off..off + dense.param_count()].split_at_mut(dense.weights.len());
                    dense_backward_raw(&upstream, x, dense, gw, gb)
                }
                Layer::Relu => {
                    for (g, &xi) in upstream.iter_mut().zip(x) {
                        if xi <= 0.0 {
                            *g = 0.0;
                        }
                    }
                    upstream
                }
                Layer::Flatten => upstream,
                Layer::Softmax => return Err(invalid!("softmax is only allowed as the last layer")),
            };
        }
        Ok(fused.loss)
    }

    /// Probabilities and cross-entropy loss for one labeled sample, without
    /// touching the cache.
    pub fn evaluate_sample(&self, input: &FeatureMap, target: usize) -> Result<(Vec<f32>, f64)> {
        let acts = self.propagate(input)?;
        let fused = softmax_cross_entropy(&acts[self.layers.len() - 1], target)?;
        Ok((acts.last().expect("non-empty").clone(), fused.loss))
    }

    /// Predicted class (first maximum) and the probability vector.
    pub fn predict(&self, input: &FeatureMap) -> Result<(usize, Vec<f32>)> {
        let probs = self.infer(input)?;
        Ok((argmax(&probs), probs))
    }
}

/// Index of the first maximum.
pub(crate) fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn count_params(net: &Network) -> usize {
    net.count_params()
}
