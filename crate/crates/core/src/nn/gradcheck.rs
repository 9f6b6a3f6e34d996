//! Finite-difference verification of [`Network::backward`].
//!
//! The numeric side does not reuse the `f32` kernels. It re-evaluates the
//! loss with a plain `f64` loop evaluator driven only by the architecture and
//! a flat parameter vector, so a bug in a kernel cannot cancel itself out.
//! Perturbations that flip a ReLU on or off are skipped: the loss is not
//! differentiable across that kink and a central difference straddling it
//! says nothing about the analytic gradient.

use alloc::vec;
use alloc::vec::Vec;

use super::network::{Architecture, LayerSpec, Network, Shape};
use super::FeatureMap;
use crate::error::invalid;
use crate::Result;

/// Gradients smaller than this are compared on an absolute scale.
const MAGNITUDE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Worst `|analytic − numeric| / max(|analytic|, |numeric|, 1e-4)`.
    pub max_rel_error: f64,
    /// Index of the parameter attaining `max_rel_error`.
    pub worst_param: usize,
    pub checked: usize,
    /// Parameters whose perturbation crossed a ReLU kink.
    pub skipped: usize,
}

/// Runs forward/backward on `net` and compares against central differences
/// on every parameter. Returns the worst relative error.
pub fn grad_check(net: &mut Network, sample: &FeatureMap, target: usize, eps: f64) -> Result<f64> {
    net.forward(sample)?;
    let analytic = net.backward(target)?;
    Ok(grad_check_against(net, sample, target, eps, &analytic)?.max_rel_error)
}

/// Compares a caller-supplied gradient against central differences.
pub fn grad_check_against(
    net: &Network,
    sample: &FeatureMap,
    target: usize,
    eps: f64,
    analytic: &[f32],
) -> Result<GradCheckReport> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(invalid!("finite-difference step must be positive, got {eps}"));
    }
    if analytic.len() != net.count_params() {
        return Err(invalid!(
            "analytic gradient has {} values, network has {} parameters",
            analytic.len(),
            net.count_params()
        ));
    }
    let eval = Reference::new(net.architecture(), sample, target)?;
    let mut params: Vec<f64> = net.params().iter().map(|&p| f64::from(p)).collect();
    let (_, base_mask) = eval.loss(&params);

    let mut report = GradCheckReport { max_rel_error: 0.0, worst_param: 0, checked: 0, skipped: 0 };
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + eps;
        let (plus, mask_plus) = eval.loss(&params);
        params[i] = orig - eps;
        let (minus, mask_minus) = eval.loss(&params);
        params[i] = orig;
        if mask_plus != base_mask || mask_minus != base_mask {
            report.skipped += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * eps);
        let a = f64::from(analytic[i]);
        let denom = a.abs().max(numeric.abs()).max(MAGNITUDE_FLOOR);
        let rel = (a - numeric).abs() / denom;
        report.checked += 1;
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_param = i;
        }
    }
    Ok(report)
}

/// Loss evaluator in `f64` over a flat canonical parameter vector.
struct Reference<'a> {
    arch: &'a Architecture,
    shapes: Vec<Shape>,
    input: Vec<f64>,
    target: usize,
}

impl<'a> Reference<'a> {
    fn new(arch: &'a Architecture, sample: &FeatureMap, target: usize) -> Result<Self> {
        let shapes = arch.validate()?;
        if shapes[0] != (Shape::Map { length: sample.length(), channels: sample.channels() }) {
            return Err(invalid!("sample shape does not match the network input"));
        }
        if target >= shapes.last().expect("non-empty").len() {
            return Err(invalid!("target class {target} out of range"));
        }
        let input = sample.as_slice().iter().map(|&v| f64::from(v)).collect();
        Ok(Self { arch, shapes, input, target })
    }

    /// Loss plus the on/off pattern of every ReLU unit.
    fn loss(&self, params: &[f64]) -> (f64, Vec<bool>) {
        let mut x = self.input.clone();
        let mut mask = Vec::new();
        let mut off = 0;
        for (spec, shape) in self.arch.layers.iter().zip(&self.shapes) {
            x = match (*spec, *shape) {
                (LayerSpec::Conv1d { filters, kernel_size }, Shape::Map { length, channels }) => {
                    let w = &params[off..off + filters * kernel_size * channels];
                    let b = &params[off + w.len()..off + w.len() + filters];
                    off += w.len() + filters;
                    let half = kernel_size as isize / 2;
                    let mut y = vec![0.0; length * filters];
                    for i in 0..length {
                        for f in 0..filters {
                            let mut acc = b[f];
                            for k in 0..kernel_size {
                                let j = i as isize + k as isize - half;
                                if j < 0 || j >= length as isize {
                                    continue;
                                }
                                for c in 0..channels {
                                    acc += w[(f * kernel_size + k) * channels + c] * x[j as usize * channels + c];
                                }
                            }
                            y[i * filters + f] = acc;
                        }
                    }
                    y
                }
                (LayerSpec::Dense { units }, Shape::Vector(n)) => {
                    let w = &params[off..off + n * units];
                    let b = &params[off + n * units..off + n * units + units];
                    off += n * units + units;
                    (0..units)
                        .map(|j| b[j] + (0..n).map(|i| w[i * units + j] * x[i]).sum::<f64>())
                        .collect()
                }
                (LayerSpec::Relu, _) => {
                    mask.extend(x.iter().map(|&v| v > 0.0));
                    x.iter().map(|&v| v.max(0.0)).collect()
                }
                (LayerSpec::Flatten, _) => x,
                // the softmax is applied inside the loss below
                (LayerSpec::Softmax, _) => x,
                _ => unreachable!("validated"),
            };
        }
        let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + libm::log(x.iter().map(|&z| libm::exp(z - max)).sum::<f64>());
        (lse - x[self.target], mask)
    }
}
