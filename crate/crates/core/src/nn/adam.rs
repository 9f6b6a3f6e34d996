use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub epsilon: f32,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-7 }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(invalid!("learning rate must be positive, got {}", self.lr));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(invalid!("{name} must lie in (0, 1), got {b}"));
            }
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(invalid!("epsilon must be positive, got {}", self.epsilon));
        }
        Ok(())
    }
}

/// First/second moment estimates and step counter for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<f32>,
    pub v: Vec<f32>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n_params: usize, config: AdamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 })
    }

    pub fn step(&mut self, params: &mut [f32], grads: &[f32]) -> Result<()> {
        adam_step(params, grads, self)
    }
}

/// One bias-corrected Adam update, in place.
///
/// ```text
/// m ← β1·m + (1−β1)·g
/// v ← β2·v + (1−β2)·g²
/// p ← p − lr · (m / (1−β1ᵗ)) / (sqrt(v / (1−β2ᵗ)) + ε)
/// ```
pub fn adam_step(params: &mut [f32], grads: &[f32], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() || params.len() != state.v.len() {
        return Err(invalid!(
            "adam length mismatch: params {}, grads {}, m {}, v {}",
            params.len(),
            grads.len(),
            state.m.len(),
            state.v.len()
        ));
    }
    state.t += 1;
    let AdamConfig { lr, beta1, beta2, epsilon } = state.config;
    let t = state.t.min(i32::MAX as u64) as i32;
    let bc1 = (1.0 - libm::pow(f64::from(beta1), f64::from(t))) as f32;
    let bc2 = (1.0 - libm::pow(f64::from(beta2), f64::from(t))) as f32;
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (libm::sqrtf(v_hat) + epsilon);
    }
    Ok(())
}
