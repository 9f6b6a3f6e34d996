use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::invalid;
use crate::Result;

/// Fractions for the train/validation/test partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train: 0.7, val: 0.2, test: 0.1, seed: 42 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("train", self.train), ("val", self.val), ("test", self.test)] {
            if !(r > 0.0 && r < 1.0) {
                return Err(invalid!("{name} ratio must lie in (0, 1), got {r}"));
            }
        }
        let sum = self.train + self.val + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(invalid!("split ratios must sum to 1, got {sum}"));
        }
        Ok(())
    }

    /// `(⌊n·train⌋, ⌊n·val⌋, remainder)`.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // the nudge keeps products like 10 × 0.7 from flooring to 6
        let floor = |r: f64| libm::floor(n as f64 * r + 1e-9) as usize;
        let train = floor(self.train).min(n);
        let val = floor(self.val).min(n - train);
        (train, val, n - train - val)
    }
}

/// Seeded Fisher–Yates permutation of `0..n`, cut into the three partitions.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if n == 0 {
        return Err(invalid!("cannot split an empty dataset"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    fisher_yates(&mut order, &mut ChaCha8Rng::seed_from_u64(spec.seed));
    let (n_train, n_val, _) = spec.sizes(n);
    let test = order.split_off(n_train + n_val);
    let val = order.split_off(n_train);
    Ok((order, val, test))
}

pub(crate) fn fisher_yates<T, R: Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

pub fn shuffle_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let (train, val, test) = split_indices(ds.len(), spec)?;
    let pick = |idx: &[usize]| Dataset::new(idx.iter().map(|&i| ds.samples[i]).collect(), ds.provenance);
    Ok((pick(&train), pick(&val), pick(&test)))
}
