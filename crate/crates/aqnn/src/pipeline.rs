//! The split → normalize → initialize → train sequence shared by the CLI
//! and the tests.

use aqnn_core::data::{fit_normalizer, shuffle_split, Dataset, Examples, NormStats, SplitSpec};
use aqnn_core::nn::{init_network, Architecture, Network};
use aqnn_core::train::{train, EpochMetrics, TrainConfig, TrainOutcome};

use crate::error::Result;

/// Normalized splits; statistics are fitted on the training part only.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub norm: NormStats,
    pub train: Examples,
    pub val: Examples,
    pub test: Examples,
}

pub fn prepare(ds: &Dataset, split: &SplitSpec) -> Result<Prepared> {
    let (train, val, test) = shuffle_split(ds, split)?;
    let norm = fit_normalizer(&train)?;
    Ok(Prepared {
        train: train.to_examples(&norm)?,
        val: val.to_examples(&norm)?,
        test: test.to_examples(&norm)?,
        norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub init_seed: u64,
}

impl RunConfig {
    /// One seed drives the split, the initialization and the batch order.
    pub fn seeded(seed: u64, train: TrainConfig) -> Self {
        Self { split: SplitSpec { seed, ..SplitSpec::default() }, train: TrainConfig { seed, ..train }, init_seed: seed }
    }
}

pub struct RunResult {
    /// Network loaded with the best checkpoint.
    pub net: Network,
    pub outcome: TrainOutcome,
    pub data: Prepared,
}

pub fn run_training(
    arch: &Architecture,
    ds: &Dataset,
    cfg: &RunConfig,
    on_epoch: &mut dyn FnMut(&EpochMetrics),
) -> Result<RunResult> {
    let data = prepare(ds, &cfg.split)?;
    let mut net = init_network(arch, cfg.init_seed)?;
    let outcome = train(&mut net, &data.train, &data.val, &cfg.train, on_epoch)?;
    net.set_params(&outcome.best.params)?;
    Ok(RunResult { net, outcome, data })
}

pub fn progress_line(m: &EpochMetrics) -> String {
    format!(
        "epoch={} train_loss={:.6} train_acc={:.6} val_loss={:.6} val_acc={:.6}",
        m.epoch, m.train_loss, m.train_acc, m.val_loss, m.val_acc
    )
}
