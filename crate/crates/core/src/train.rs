//! Mini-batch training with best-validation checkpointing.
//!
//! Each epoch shuffles the training examples (seeded), walks them in batches
//! of `batch_size` with the final partial batch included, averages the
//! per-sample gradients over the batch and applies one Adam step per batch.
//! After the epoch the validation split is scored and the checkpoint is
//! replaced only on a strictly higher validation accuracy.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{fisher_yates, Examples};
use crate::error::invalid;
use crate::metrics::score_examples;
use crate::nn::{AdamConfig, AdamState, Network};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 200, batch_size: 64, adam: AdamConfig::default(), seed: 42, shuffle_each_epoch: true }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(invalid!("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(invalid!("batch size must be at least 1"));
        }
        self.adam.validate()
    }
}

/// Training and validation figures for one epoch. `epoch` counts from 1.
/// Training figures are running means over the epoch's forward passes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: Vec<f32>,
    pub epoch: usize,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub best: Checkpoint,
    pub history: Vec<EpochMetrics>,
}

/// Trains `net` in place. On return `net` holds the last epoch's parameters;
/// the best-validation parameters are in `outcome.best`.
pub fn train(
    net: &mut Network,
    train_set: &Examples,
    val_set: &Examples,
    cfg: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(invalid!("training split is empty"));
    }
    if val_set.is_empty() {
        return Err(invalid!("validation split is empty"));
    }
    for set in [train_set, val_set] {
        if set.inputs.len() != set.targets.len() {
            return Err(invalid!("examples have {} inputs but {} targets", set.inputs.len(), set.targets.len()));
        }
    }

    let n_params = net.count_params();
    let mut params = net.params();
    let mut adam = AdamState::new(n_params, cfg.adam)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut grad = vec![0.0f32; n_params];
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<Checkpoint> = None;

    for epoch in 1..=cfg.epochs {
        if cfg.shuffle_each_epoch {
            fisher_yates(&mut order, &mut rng);
        }
        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for (batch_idx, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                let probs = net.forward(&train_set.inputs[i])?;
                let target = train_set.targets[i];
                if crate::nn::argmax(&probs) == target {
                    correct += 1;
                }
                let loss = net.accumulate_gradient(target, &mut grad)?;
                if !loss.is_finite() {
                    return Err(Error::NumericDivergence { epoch, batch: batch_idx + 1 });
                }
                loss_sum += loss;
            }
            let scale = 1.0 / batch.len() as f32;
            grad.iter_mut().for_each(|g| *g *= scale);
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NumericDivergence { epoch, batch: batch_idx + 1 });
            }
            adam.step(&mut params, &grad)?;
            net.set_params(&params)?;
        }

        let val = score_examples(net, val_set)?;
        let metrics = EpochMetrics {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            train_acc: correct as f64 / train_set.len() as f64,
            val_loss: val.mean_loss,
            val_acc: val.accuracy,
        };
        if !metrics.val_loss.is_finite() {
            return Err(Error::NumericDivergence { epoch, batch: 0 });
        }
        if best.as_ref().is_none_or(|b| metrics.val_acc > b.val_acc) {
            best = Some(Checkpoint { params: params.clone(), epoch, val_acc: metrics.val_acc });
        }
        on_epoch(&metrics);
        history.push(metrics);
    }
    net.clear_cache();
    Ok(TrainOutcome { best: best.expect("at least one epoch"), history })
}

/// First epoch attaining the highest validation accuracy.
pub fn best_epoch(history: &[EpochMetrics]) -> Option<usize> {
    let mut best: Option<&EpochMetrics> = None;
    for m in history {
        if best.is_none_or(|b| m.val_acc > b.val_acc) {
            best = Some(m);
        }
    }
    best.map(|m| m.epoch)
}

/// The checkpoint captured at [`best_epoch`], if it was kept.
pub fn resolve_best<'a>(history: &[EpochMetrics], checkpoints: &'a [Checkpoint]) -> Option<&'a Checkpoint> {
    let epoch = best_epoch(history)?;
    checkpoints.iter().find(|c| c.epoch == epoch)
}

/// Means of consecutive non-overlapping windows of `window` values; a
/// trailing partial window is dropped.
pub fn window_means(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 {
        return Vec::new();
    }
    values.chunks_exact(window).map(|w| w.iter().sum::<f64>() / window as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{fit_normalizer, shuffle_split, synth_generate, SplitSpec};
    use crate::nn::{init_network, Architecture};

    fn metrics(val_accs: &[f64]) -> Vec<EpochMetrics> {
        val_accs
            .iter()
            .enumerate()
            .map(|(i, &v)| EpochMetrics { epoch: i + 1, train_loss: 0.0, train_acc: 0.0, val_loss: 0.0, val_acc: v })
            .collect()
    }

    fn checkpoints(h: &[EpochMetrics]) -> Vec<Checkpoint> {
        h.iter().map(|m| Checkpoint { params: vec![m.epoch as f32], epoch: m.epoch, val_acc: m.val_acc }).collect()
    }

    #[test]
    fn resolve_best_rules() {
        let h = metrics(&[0.5, 0.9, 0.7]);
        assert_eq!(resolve_best(&h, &checkpoints(&h)).unwrap().epoch, 2);
        let h = metrics(&[0.9, 0.9]);
        assert_eq!(resolve_best(&h, &checkpoints(&h)).unwrap().epoch, 1);
        let h = metrics(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(resolve_best(&h, &checkpoints(&h)).unwrap().epoch, 4);
        assert_eq!(best_epoch(&[]), None);
    }

    #[test]
    fn window_means_drop_partial() {
        assert_eq!(window_means(&[1.0, 2.0, 3.0, 4.0, 5.0], 2), vec![1.5, 3.5]);
        assert!(window_means(&[1.0], 0).is_empty());
    }

    fn small_sets() -> (Examples, Examples) {
        let ds = synth_generate(20, 3).unwrap();
        let (tr, va, _) = shuffle_split(&ds, &SplitSpec::default()).unwrap();
        let stats = fit_normalizer(&tr).unwrap();
        (tr.to_examples(&stats).unwrap(), va.to_examples(&stats).unwrap())
    }

    #[test]
    fn one_epoch() {
        let (tr, va) = small_sets();
        let mut net = init_network(&Architecture::reference_cnn(), 1).unwrap();
        let cfg = TrainConfig { epochs: 1, ..TrainConfig::default() };
        let mut seen = 0;
        let out = train(&mut net, &tr, &va, &cfg, &mut |_| seen += 1).unwrap();
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.best.epoch, 1);
        assert_eq!(seen, 1);
        assert_eq!(net.count_params(), 5416);
    }

    #[test]
    fn rejects_empty_and_bad_config() {
        let (tr, va) = small_sets();
        let empty = Examples { inputs: vec![], targets: vec![] };
        let mut net = init_network(&Architecture::reference_cnn(), 1).unwrap();
        let cfg = TrainConfig { epochs: 1, ..TrainConfig::default() };
        assert!(train(&mut net, &empty, &va, &cfg, &mut |_| {}).is_err());
        assert!(train(&mut net, &tr, &empty, &cfg, &mut |_| {}).is_err());
        let bad = TrainConfig { batch_size: 0, ..cfg };
        assert!(train(&mut net, &tr, &va, &bad, &mut |_| {}).is_err());
    }

    #[test]
    fn diverging_run_is_reported() {
        let (tr, va) = small_sets();
        let mut net = init_network(&Architecture::reference_cnn(), 1).unwrap();
        let cfg = TrainConfig {
            epochs: 50,
            adam: AdamConfig { lr: 1e30, ..AdamConfig::default() },
            ..TrainConfig::default()
        };
        match train(&mut net, &tr, &va, &cfg, &mut |_| {}) {
            Err(Error::NumericDivergence { epoch, .. }) => assert!(epoch >= 1),
            Err(other) => panic!("unexpected error {other:?}"),
            Ok(_) => panic!("expected divergence"),
        }
    }
}
