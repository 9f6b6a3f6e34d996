//! Sensor samples and everything that turns raw readings into network
//! inputs: normalization, seeded splits and a synthetic stand-in dataset.

mod normalize;
mod split;
mod synth;

use alloc::vec::Vec;
use core::fmt;

pub use normalize::{apply_normalizer, fit_normalizer, NormStats};
pub(crate) use split::fisher_yates;
pub use split::{shuffle_split, split_indices, SplitSpec};
pub use synth::{synth_generate, synth_generate_with, SynthProfile};

use crate::error::invalid;
use crate::nn::FeatureMap;
use crate::{Result, NUM_CLASSES, NUM_SENSORS};

/// Sensor channel names in input order.
pub const SENSOR_NAMES: [&str; NUM_SENSORS] = ["MQ2", "MQ9", "MQ135", "MQ137", "MQ138", "MG-811"];

/// The four activities of daily living, in label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActivityClass {
    Normal = 0,
    PreparingMeals = 1,
    Smoke = 2,
    Cleaning = 3,
}

impl ActivityClass {
    pub const ALL: [ActivityClass; NUM_CLASSES] =
        [ActivityClass::Normal, ActivityClass::PreparingMeals, ActivityClass::Smoke, ActivityClass::Cleaning];

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivityClass::Normal => "Normal Situation",
            ActivityClass::PreparingMeals => "Preparing Meals",
            ActivityClass::Smoke => "Presence of Smoke",
            ActivityClass::Cleaning => "Cleaning",
        }
    }

    /// Lower-case single-word tag, used in alert events.
    pub fn tag(self) -> &'static str {
        match self {
            ActivityClass::Normal => "normal",
            ActivityClass::PreparingMeals => "meals",
            ActivityClass::Smoke => "smoke",
            ActivityClass::Cleaning => "cleaning",
        }
    }
}

impl fmt::Display for ActivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One observation: six raw sensor outputs and, for training data, a label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSample {
    pub readings: [f32; NUM_SENSORS],
    pub label: Option<ActivityClass>,
}

impl SensorSample {
    pub fn new(readings: [f32; NUM_SENSORS], label: Option<ActivityClass>) -> Result<Self> {
        if let Some(i) = readings.iter().position(|r| !r.is_finite()) {
            return Err(invalid!("reading {} ({}) is not finite", i, SENSOR_NAMES[i]));
        }
        Ok(Self { readings, label })
    }

    pub fn labeled(readings: [f32; NUM_SENSORS], label: ActivityClass) -> Result<Self> {
        Self::new(readings, Some(label))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    File,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<SensorSample>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(samples: Vec<SensorSample>, provenance: Provenance) -> Self {
        Self { samples, provenance }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Result<Vec<ActivityClass>> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| s.label.ok_or_else(|| invalid!("sample {i} has no label")))
            .collect()
    }

    /// Normalized network inputs with their class indices.
    pub fn to_examples(&self, stats: &NormStats) -> Result<Examples> {
        let targets = self.labels()?.into_iter().map(ActivityClass::index).collect();
        let inputs = self.samples.iter().map(|s| apply_normalizer(s, stats)).collect();
        Ok(Examples { inputs, targets })
    }
}

/// Normalized inputs paired with target class indices, ready for training
/// or evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Examples {
    pub inputs: Vec<FeatureMap>,
    pub targets: Vec<usize>,
}

impl Examples {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Per-class sample counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassCounts {
    pub counts: [usize; NUM_CLASSES],
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// True when some class has no samples at all.
    pub fn has_empty_class(&self) -> bool {
        self.counts.contains(&0)
    }
}

pub fn class_distribution(ds: &Dataset) -> Result<ClassCounts> {
    let mut counts = [0; NUM_CLASSES];
    for label in ds.labels()? {
        counts[label.index()] += 1;
    }
    Ok(ClassCounts { counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn class_indices_and_names() {
        for (i, c) in ActivityClass::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(ActivityClass::from_index(i), Some(*c));
        }
        assert_eq!(ActivityClass::from_index(4), None);
        assert_eq!(ActivityClass::Smoke.name(), "Presence of Smoke");
        assert_eq!(ActivityClass::Normal.name(), "Normal Situation");
    }

    #[test]
    fn distribution_counts_and_flags() {
        let s = |c| SensorSample::labeled([1.0; 6], c).unwrap();
        let mut samples = vec![s(ActivityClass::Normal); 122];
        samples.extend(vec![s(ActivityClass::PreparingMeals); 108]);
        samples.extend(vec![s(ActivityClass::Smoke); 41]);
        samples.extend(vec![s(ActivityClass::Cleaning); 98]);
        let counts = class_distribution(&Dataset::new(samples, Provenance::File)).unwrap();
        assert_eq!(counts.counts, [122, 108, 41, 98]);
        assert_eq!(counts.total(), 369);
        assert!(!counts.has_empty_class());

        let one = Dataset::new(vec![s(ActivityClass::Smoke)], Provenance::File);
        assert!(class_distribution(&one).unwrap().has_empty_class());

        let unlabeled = Dataset::new(vec![SensorSample::new([0.0; 6], None).unwrap()], Provenance::File);
        assert!(class_distribution(&unlabeled).is_err());
    }

    #[test]
    fn rejects_non_finite_readings() {
        assert!(SensorSample::new([0.0, f32::NAN, 0.0, 0.0, 0.0, 0.0], None).is_err());
    }
}
