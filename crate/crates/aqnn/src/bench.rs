use std::time::Instant;

use aqnn_core::nn::{FeatureMap, Network};
use aqnn_core::Error;

use crate::error::Result;

pub const WARMUP: usize = 10;

/// Single-sample inference timings in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyStats {
    pub mean: f64,
    pub p50: f64,
    pub p99: f64,
    pub max: f64,
    pub count: usize,
}

impl LatencyStats {
    /// Nearest-rank percentiles over `durations`; `None` when empty.
    pub fn from_durations(durations: &[f64]) -> Option<Self> {
        if durations.is_empty() {
            return None;
        }
        let mut sorted = durations.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = |q: f64| sorted[((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1];
        Some(Self {
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p50: rank(0.5),
            p99: rank(0.99),
            max: sorted[sorted.len() - 1],
            count: sorted.len(),
        })
    }
}

/// Times `iterations` forward passes cycling through `samples`, after
/// `WARMUP` passes whose timings are discarded.
pub fn latency_benchmark(net: &Network, samples: &[FeatureMap], iterations: usize) -> Result<LatencyStats> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples to time".into()).into());
    }
    if iterations < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 iterations, got {iterations}")).into());
    }
    let mut durations = Vec::with_capacity(iterations);
    for i in 0..WARMUP + iterations {
        let x = &samples[i % samples.len()];
        let start = Instant::now();
        let probs = net.infer(x)?;
        let elapsed = start.elapsed().as_secs_f64();
        std::hint::black_box(probs);
        if i >= WARMUP {
            durations.push(elapsed);
        }
    }
    Ok(LatencyStats::from_durations(&durations).expect("iterations > 0"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use aqnn_core::nn::{init_network, Architecture};

    #[test]
    fn percentile_ordering() {
        let d: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = LatencyStats::from_durations(&d).unwrap();
        assert_eq!((s.p50, s.p99, s.max, s.count), (50.0, 99.0, 100.0, 100));
        assert_eq!(s.mean, 50.5);
        assert!(LatencyStats::from_durations(&[]).is_none());
    }

    #[test]
    fn benchmark_preconditions() {
        let net = init_network(&Architecture::reference_cnn(), 1).unwrap();
        let x = FeatureMap::column(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        assert!(latency_benchmark(&net, &[], 100).is_err());
        assert!(latency_benchmark(&net, std::slice::from_ref(&x), 99).is_err());
        let s = latency_benchmark(&net, &[x], 200).unwrap();
        assert_eq!(s.count, 200);
        assert!(s.p50 <= s.p99 && s.p99 <= s.max);
    }
}
