use super::{Dataset, SensorSample};
use crate::error::invalid;
use crate::nn::FeatureMap;
use crate::{Result, NUM_SENSORS};

/// Columns whose spread falls below this are left unscaled.
const DEGENERATE_STD: f64 = 1e-9;

/// Per-sensor z-score statistics, fit on the training split only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormStats {
    pub mean: [f32; NUM_SENSORS],
    pub std: [f32; NUM_SENSORS],
}

impl NormStats {
    pub fn identity() -> Self {
        Self { mean: [0.0; NUM_SENSORS], std: [1.0; NUM_SENSORS] }
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..NUM_SENSORS {
            if !self.mean[i].is_finite() || !self.std[i].is_finite() || self.std[i] <= 0.0 {
                return Err(invalid!(
                    "normalization column {i}: mean {} std {}",
                    self.mean[i],
                    self.std[i]
                ));
            }
        }
        Ok(())
    }

    pub fn normalize(&self, readings: &[f32; NUM_SENSORS]) -> [f32; NUM_SENSORS] {
        core::array::from_fn(|i| (readings[i] - self.mean[i]) / self.std[i])
    }

    pub fn denormalize(&self, z: &[f32; NUM_SENSORS]) -> [f32; NUM_SENSORS] {
        core::array::from_fn(|i| z[i] * self.std[i] + self.mean[i])
    }
}

/// Mean and population standard deviation of each sensor column.
pub fn fit_normalizer(train: &Dataset) -> Result<NormStats> {
    if train.is_empty() {
        return Err(invalid!("cannot fit normalization on an empty dataset"));
    }
    let n = train.len() as f64;
    let mut mean = [0.0f64; NUM_SENSORS];
    for s in &train.samples {
        for (m, &r) in mean.iter_mut().zip(&s.readings) {
            *m += f64::from(r);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0f64; NUM_SENSORS];
    for s in &train.samples {
        for i in 0..NUM_SENSORS {
            let d = f64::from(s.readings[i]) - mean[i];
            var[i] += d * d;
        }
    }
    let std = core::array::from_fn(|i| {
        let sd = libm::sqrt(var[i] / n);
        if sd < DEGENERATE_STD {
            1.0
        } else {
            sd as f32
        }
    });
    Ok(NormStats { mean: core::array::from_fn(|i| mean[i] as f32), std })
}

/// Z-scores a sample into the `6 × 1` feature map the network consumes.
pub fn apply_normalizer(sample: &SensorSample, stats: &NormStats) -> FeatureMap {
    FeatureMap::from_raw(NUM_SENSORS, 1, stats.normalize(&sample.readings).to_vec())
}
