//! Synthetic stand-in for the six-sensor activity dataset.
//!
//! Each class is an axis-aligned Gaussian in raw sensor units. Offsets from
//! the clean-air baseline are expressed in multiples of the per-channel
//! spread, and every channel that discriminates a pair of classes separates
//! their means by at least three spreads.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{ActivityClass, Dataset, Provenance, SensorSample};
use crate::error::invalid;
use crate::{Result, NUM_CLASSES, NUM_SENSORS};

/// Generator parameters: clean-air baseline, per-channel spread and
/// per-class offsets in units of spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthProfile {
    pub baseline: [f32; NUM_SENSORS],
    pub spread: [f32; NUM_SENSORS],
    pub offsets: [[f32; NUM_SENSORS]; NUM_CLASSES],
}

impl Default for SynthProfile {
    fn default() -> Self {
        Self {
            // MQ2, MQ9, MQ135, MQ137, MQ138, MG-811
            baseline: [310.0, 205.0, 180.0, 95.0, 140.0, 1450.0],
            spread: [12.0, 8.0, 8.0, 4.0, 6.0, 30.0],
            offsets: [
                [0.0; NUM_SENSORS],
                [4.0; NUM_SENSORS],
                [9.0, 9.0, 0.0, 0.0, 0.0, 4.0],
                [0.0, 0.0, 9.0, 9.0, 9.0, 0.0],
            ],
        }
    }
}

impl SynthProfile {
    pub fn class_mean(&self, class: ActivityClass) -> [f32; NUM_SENSORS] {
        let off = &self.offsets[class.index()];
        core::array::from_fn(|i| self.baseline[i] + off[i] * self.spread[i])
    }
}

/// `4 · n_per_class` labeled samples, class blocks in label order.
pub fn synth_generate(n_per_class: usize, seed: u64) -> Result<Dataset> {
    synth_generate_with(&SynthProfile::default(), n_per_class, seed)
}

pub fn synth_generate_with(profile: &SynthProfile, n_per_class: usize, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(invalid!("n_per_class must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0f32, 1.0).expect("unit normal");
    let mut samples = Vec::with_capacity(n_per_class * NUM_CLASSES);
    for class in ActivityClass::ALL {
        let mean = profile.class_mean(class);
        for _ in 0..n_per_class {
            let readings = core::array::from_fn(|i| mean[i] + profile.spread[i] * unit.sample(&mut rng));
            samples.push(SensorSample::labeled(readings, class)?);
        }
    }
    Ok(Dataset::new(samples, Provenance::Synthetic))
}
