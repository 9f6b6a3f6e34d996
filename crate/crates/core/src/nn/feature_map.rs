use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::Result;

/// A `length × channels` grid of activations, stored row-major
/// (`values[i * channels + c]`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    length: usize,
    channels: usize,
    values: Vec<f32>,
}

impl FeatureMap {
    pub fn new(length: usize, channels: usize, values: Vec<f32>) -> Result<Self> {
        if length == 0 || channels == 0 {
            return Err(invalid!(
                "feature map needs positive length and channels, got {length}x{channels}"
            ));
        }
        if values.len() != length * channels {
            return Err(invalid!(
                "feature map {length}x{channels} needs {} values, got {}",
                length * channels,
                values.len()
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid!("non-finite value at position {pos}"));
        }
        Ok(Self { length, channels, values })
    }

    pub fn zeros(length: usize, channels: usize) -> Self {
        Self { length, channels, values: vec![0.0; length * channels] }
    }

    /// Single-channel map holding `column` as its positions: the `(n, 1)`
    /// layout the network expects for one sensor observation.
    pub fn column(column: &[f32]) -> Result<Self> {
        Self::new(column.len(), 1, column.to_vec())
    }

    pub(crate) fn from_raw(length: usize, channels: usize, values: Vec<f32>) -> Self {
        debug_assert_eq!(values.len(), length * channels);
        Self { length, channels, values }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn get(&self, position: usize, channel: usize) -> f32 {
        self.values[position * self.channels + channel]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }
}
