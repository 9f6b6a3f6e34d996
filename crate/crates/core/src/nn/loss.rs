use alloc::vec::Vec;

use crate::error::invalid;
use crate::Result;

/// Result of the fused softmax / categorical cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxOutput {
    pub probs: Vec<f32>,
    /// `-ln p[target]`, computed as `logsumexp(z) - z[target]` in `f64` so a
    /// saturated wrong prediction stays finite.
    pub loss: f64,
    /// `probs - onehot(target)`.
    pub grad_logits: Vec<f32>,
}

pub fn softmax_cross_entropy(logits: &[f32], target: usize) -> Result<SoftmaxOutput> {
    if target >= logits.len() {
        return Err(invalid!("target class {target} outside 0..{}", logits.len()));
    }
    let (probs, log_norm) = softmax_f64(logits)?;
    let raw = log_norm - f64::from(logits[target]);
    // rounding can leave a saturated prediction a hair below zero; NaN passes through
    let loss = if raw < 0.0 { 0.0 } else { raw };
    let grad_logits = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| if i == target { (p - 1.0) as f32 } else { p as f32 })
        .collect();
    Ok(SoftmaxOutput { probs: probs.iter().map(|&p| p as f32).collect(), loss, grad_logits })
}

/// Max-shifted softmax; also returns `ln Σ exp(z)`. Non-finite logits yield
/// NaN probabilities rather than an error so callers can report divergence.
pub(crate) fn softmax_f64(logits: &[f32]) -> Result<(Vec<f64>, f64)> {
    if logits.is_empty() {
        return Err(invalid!("softmax over an empty vector"));
    }
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(f64::from(v)));
    let exps: Vec<f64> = logits.iter().map(|&v| libm::exp(f64::from(v) - max)).collect();
    let sum: f64 = exps.iter().sum();
    Ok((exps.iter().map(|e| e / sum).collect(), max + libm::log(sum)))
}
