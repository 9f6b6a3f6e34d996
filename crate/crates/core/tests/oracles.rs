//! Independent reference implementations checked against the kernels.

use aqnn_core::baselines::KnnModel;
use aqnn_core::nn::{
    adam_step, conv1d_backward, conv1d_forward, dense_backward, grad_check, grad_check_against, init_network,
    AdamConfig, AdamState, Architecture, Conv1d, Dense, FeatureMap, Network,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_conv(rng: &mut ChaCha8Rng, filters: usize, kernel: usize, cin: usize) -> Conv1d {
    Conv1d {
        filters,
        kernel_size: kernel,
        in_channels: cin,
        weights: (0..filters * kernel * cin).map(|_| rng.random_range(-1.0f32..1.0)).collect(),
        bias: (0..filters).map(|_| rng.random_range(-1.0f32..1.0)).collect(),
    }
}

fn random_map(rng: &mut ChaCha8Rng, length: usize, channels: usize) -> FeatureMap {
    FeatureMap::new(length, channels, (0..length * channels).map(|_| rng.random_range(-2.0f32..2.0)).collect()).unwrap()
}

/// Direct transcription of the convolution sum, one output cell at a time:
/// bias first, then kernel taps and channels in ascending order.
fn naive_conv(x: &FeatureMap, w: &Conv1d) -> Vec<f32> {
    let half = (w.kernel_size / 2) as isize;
    let mut out = vec![0.0f32; x.length() * w.filters];
    for i in 0..x.length() {
        for f in 0..w.filters {
            let mut acc = w.bias[f];
            for k in 0..w.kernel_size {
                let j = i as isize + k as isize - half;
                if j < 0 || j >= x.length() as isize {
                    continue;
                }
                for c in 0..w.in_channels {
                    acc += w.weights[(f * w.kernel_size + k) * w.in_channels + c] * x.get(j as usize, c);
                }
            }
            out[i * w.filters + f] = acc;
        }
    }
    out
}

#[test]
fn conv_forward_matches_naive_loops_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let length = rng.random_range(1..=12);
        let cin = rng.random_range(1..=4);
        let filters = rng.random_range(1..=6);
        let kernel = rng.random_range(1..=5);
        let x = random_map(&mut rng, length, cin);
        let layer = random_conv(&mut rng, filters, kernel, cin);
        let got = conv1d_forward(&x, &layer).unwrap();
        let want = naive_conv(&x, &layer);
        let bits = |v: &[f32]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(got.as_slice()), bits(&want));
    }
}

/// `Σ g · conv(x)` evaluated in f64; linear in every weight and input.
fn conv_objective(x: &[f64], length: usize, w: &[f64], b: &[f64], layer: &Conv1d, g: &[f32]) -> f64 {
    let (f_n, k_n, c_n) = (layer.filters, layer.kernel_size, layer.in_channels);
    let half = (k_n / 2) as isize;
    let mut total = 0.0;
    for i in 0..length {
        for f in 0..f_n {
            let mut acc = b[f];
            for k in 0..k_n {
                let j = i as isize + k as isize - half;
                if j < 0 || j >= length as isize {
                    continue;
                }
                for c in 0..c_n {
                    acc += w[(f * k_n + k) * c_n + c] * x[j as usize * c_n + c];
                }
            }
            total += f64::from(g[i * f_n + f]) * acc;
        }
    }
    total
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-4)
}

#[test]
fn conv_backward_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let eps = 1e-3;
    for _ in 0..5 {
        let x = random_map(&mut rng, 6, 1);
        let layer = random_conv(&mut rng, 4, 3, 1);
        let g = random_map(&mut rng, 6, 4);
        let grads = conv1d_backward(&g, &x, &layer).unwrap();

        let mut xs: Vec<f64> = x.as_slice().iter().map(|&v| f64::from(v)).collect();
        let mut ws: Vec<f64> = layer.weights.iter().map(|&v| f64::from(v)).collect();
        let mut bs: Vec<f64> = layer.bias.iter().map(|&v| f64::from(v)).collect();
        let obj = |xs: &[f64], ws: &[f64], bs: &[f64]| conv_objective(xs, 6, ws, bs, &layer, g.as_slice());

        for i in 0..xs.len() {
            let o = xs[i];
            xs[i] = o + eps;
            let p = obj(&xs, &ws, &bs);
            xs[i] = o - eps;
            let m = obj(&xs, &ws, &bs);
            xs[i] = o;
            assert!(rel_err(f64::from(grads.input.as_slice()[i]), (p - m) / (2.0 * eps)) < 1e-3);
        }
        for i in 0..ws.len() {
            let o = ws[i];
            ws[i] = o + eps;
            let p = obj(&xs, &ws, &bs);
            ws[i] = o - eps;
            let m = obj(&xs, &ws, &bs);
            ws[i] = o;
            assert!(rel_err(f64::from(grads.weights[i]), (p - m) / (2.0 * eps)) < 1e-3);
        }
        for i in 0..bs.len() {
            let o = bs[i];
            bs[i] = o + eps;
            let p = obj(&xs, &ws, &bs);
            bs[i] = o - eps;
            let m = obj(&xs, &ws, &bs);
            bs[i] = o;
            assert!(rel_err(f64::from(grads.bias[i]), (p - m) / (2.0 * eps)) < 1e-3);
        }
    }
}

#[test]
fn dense_backward_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let eps = 1e-3;
    let (n_in, n_out) = (7, 5);
    let layer = Dense {
        in_dim: n_in,
        out_dim: n_out,
        weights: (0..n_in * n_out).map(|_| rng.random_range(-1.0f32..1.0)).collect(),
        bias: (0..n_out).map(|_| rng.random_range(-1.0f32..1.0)).collect(),
    };
    let x: Vec<f32> = (0..n_in).map(|_| rng.random_range(-2.0f32..2.0)).collect();
    let g: Vec<f32> = (0..n_out).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    let grads = dense_backward(&g, &x, &layer).unwrap();

    let obj = |x: &[f64], w: &[f64], b: &[f64]| -> f64 {
        (0..n_out)
            .map(|j| f64::from(g[j]) * (b[j] + (0..n_in).map(|i| w[i * n_out + j] * x[i]).sum::<f64>()))
            .sum()
    };
    let mut xs: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
    let mut ws: Vec<f64> = layer.weights.iter().map(|&v| f64::from(v)).collect();
    let bs: Vec<f64> = layer.bias.iter().map(|&v| f64::from(v)).collect();
    for i in 0..n_in {
        let o = xs[i];
        xs[i] = o + eps;
        let p = obj(&xs, &ws, &bs);
        xs[i] = o - eps;
        let m = obj(&xs, &ws, &bs);
        xs[i] = o;
        assert!(rel_err(f64::from(grads.input[i]), (p - m) / (2.0 * eps)) < 1e-3);
    }
    for i in 0..ws.len() {
        let o = ws[i];
        ws[i] = o + eps;
        let p = obj(&xs, &ws, &bs);
        ws[i] = o - eps;
        let m = obj(&xs, &ws, &bs);
        ws[i] = o;
        assert!(rel_err(f64::from(grads.weights[i]), (p - m) / (2.0 * eps)) < 1e-3);
    }
    assert_eq!(grads.bias, g);
}

fn random_sample(rng: &mut ChaCha8Rng) -> FeatureMap {
    FeatureMap::column(&(0..6).map(|_| rng.random_range(-2.0f32..2.0)).collect::<Vec<_>>()).unwrap()
}

#[test]
fn network_gradient_on_ten_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for pair in 0..10u64 {
        let mut net = init_network(&Architecture::reference_cnn(), 1000 + pair).unwrap();
        let x = random_sample(&mut rng);
        let target = rng.random_range(0..4);
        let err = grad_check(&mut net, &x, target, 1e-3).unwrap();
        assert!(err < 1e-3, "pair {pair}: {err}");
    }
}

#[test]
fn mlp_gradient_agrees_too() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut net = init_network(&Architecture::reference_mlp(), 8).unwrap();
    let x = random_sample(&mut rng);
    assert!(grad_check(&mut net, &x, 1, 1e-3).unwrap() < 1e-3);
}

#[test]
fn gradient_checker_catches_faults() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut net = init_network(&Architecture::reference_cnn(), 3).unwrap();
    let x = random_sample(&mut rng);
    net.forward(&x).unwrap();
    let good = net.backward(0).unwrap();
    let report = grad_check_against(&net, &x, 0, 1e-3, &good).unwrap();
    assert!(report.max_rel_error < 1e-3);
    assert!(report.checked > 200);

    let flipped: Vec<f32> = good.iter().map(|g| -g).collect();
    assert!(grad_check_against(&net, &x, 0, 1e-3, &flipped).unwrap().max_rel_error > 0.5);

    // a single dropped term is enough to trip it
    let mut dropped = good.clone();
    let idx = dropped.iter().position(|g| g.abs() > 1e-2).unwrap();
    dropped[idx] = 0.0;
    assert!(grad_check_against(&net, &x, 0, 1e-3, &dropped).unwrap().max_rel_error > 0.5);
}

#[test]
fn zero_weight_network_checks_clean() {
    let mut net = Network::zeros(&Architecture::reference_cnn()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random_sample(&mut rng);
    assert!(grad_check(&mut net, &x, 2, 1e-3).unwrap() < 1e-3);
}

#[test]
fn adam_matches_f64_reference_for_two_steps() {
    let cfg = AdamConfig::default();
    let mut params = vec![0.5f32, -0.25, 2.0];
    let mut state = AdamState::new(3, cfg).unwrap();

    let (lr, b1, b2, eps) = (0.001f64, 0.9f64, 0.999f64, 1e-7f64);
    let mut p64: Vec<f64> = params.iter().map(|&p| f64::from(p)).collect();
    let (mut m, mut v) = (vec![0.0f64; 3], vec![0.0f64; 3]);
    for t in 1..=2 {
        adam_step(&mut params, &[1.0; 3], &mut state).unwrap();
        for i in 0..3 {
            m[i] = b1 * m[i] + (1.0 - b1) * 1.0;
            v[i] = b2 * v[i] + (1.0 - b2) * 1.0;
            let m_hat = m[i] / (1.0 - b1.powi(t));
            let v_hat = v[i] / (1.0 - b2.powi(t));
            p64[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            assert!((f64::from(params[i]) - p64[i]).abs() < 1e-6, "step {t} param {i}");
        }
        assert_eq!(state.t, t as u64);
    }
    // with a constant gradient each step moves the parameter by ~lr
    assert!((f64::from(params[0]) - (0.5 - 0.002)).abs() < 1e-6);
}

/// Full sort by (distance, index), then a plain vote.
fn brute_force_knn(points: &[[f32; 6]], labels: &[usize], k: usize, q: &[f32; 6]) -> usize {
    let mut all: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d: f64 = p.iter().zip(q).map(|(&a, &b)| (f64::from(a) - f64::from(b)).powi(2)).sum();
            (d.sqrt(), i)
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = [0usize; 4];
    let mut sums = [0.0f64; 4];
    for &(d, i) in &all[..k] {
        votes[labels[i]] += 1;
        sums[labels[i]] += d;
    }
    let top = *votes.iter().max().unwrap();
    (0..4)
        .filter(|&c| votes[c] == top)
        .min_by(|&a, &b| sums[a].partial_cmp(&sums[b]).unwrap().then(a.cmp(&b)))
        .unwrap()
}

#[test]
fn knn_matches_brute_force_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let points: Vec<[f32; 6]> = (0..300).map(|_| std::array::from_fn(|_| rng.random_range(-3.0f32..3.0))).collect();
    let labels: Vec<usize> = (0..300).map(|_| rng.random_range(0..4)).collect();
    for k in [1, 2, 4, 5, 9] {
        let model = KnnModel::new(points.clone(), labels.clone(), k).unwrap();
        for _ in 0..200 {
            let q: [f32; 6] = std::array::from_fn(|_| rng.random_range(-3.0f32..3.0));
            assert_eq!(model.predict(&q), brute_force_knn(&points, &labels, k, &q));
        }
    }
    // queries sitting on grid points produce many exact distance ties
    let grid: Vec<[f32; 6]> = (0..200).map(|i| std::array::from_fn(|c| ((i >> c) & 1) as f32)).collect();
    let grid_labels: Vec<usize> = (0..200).map(|i| i % 4).collect();
    let model = KnnModel::new(grid.clone(), grid_labels.clone(), 5).unwrap();
    for q in &grid {
        assert_eq!(model.predict(q), brute_force_knn(&grid, &grid_labels, 5, q));
    }
}
