use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use aqnn::model_file::{load_model, save_model};
use aqnn::serve::{serve_tcp, AlertRule};
use aqnn::AppError;
use aqnn_core::data::{ActivityClass, NormStats};
use aqnn_core::nn::{init_network, Architecture, FeatureMap, Network};
use aqnn_core::Error;
use rand::{Rng, SeedableRng};

fn norm() -> NormStats {
    NormStats { mean: [310.0, 205.0, 180.0, 95.0, 140.0, 1450.0], std: [12.0, 8.0, 8.0, 4.0, 6.0, 30.0] }
}

#[test]
fn saved_model_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.aqnn");
    let net = init_network(&Architecture::reference_cnn(), 21).unwrap();
    let bytes = save_model(&net, &norm(), &path).unwrap();
    assert_eq!(bytes as u64, std::fs::metadata(&path).unwrap().len());
    assert!(bytes < 23_000);
    let (back, back_norm) = load_model(&path).unwrap();
    assert_eq!(back_norm, norm());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x: Vec<f32> = (0..6).map(|_| rng.random_range(-3.0f32..3.0)).collect();
        let x = FeatureMap::column(&x).unwrap();
        let a = net.infer(&x).unwrap();
        let b = back.infer(&x).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}

#[test]
fn load_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.aqnn");
    save_model(&init_network(&Architecture::reference_cnn(), 1).unwrap(), &norm(), &path).unwrap();
    let good = std::fs::read(&path).unwrap();

    let mut bad = good.clone();
    bad[..4].copy_from_slice(b"XXXX");
    std::fs::write(&path, &bad).unwrap();
    assert!(matches!(load_model(&path), Err(AppError::Core(Error::Format))));

    let mut bad = good.clone();
    bad[5000] ^= 0x10;
    std::fs::write(&path, &bad).unwrap();
    assert!(matches!(load_model(&path), Err(AppError::Core(Error::Corrupt(_)))));

    std::fs::write(&path, &good[..good.len() / 2]).unwrap();
    assert!(matches!(load_model(&path), Err(AppError::Core(Error::Corrupt(_)))));

    assert!(matches!(load_model(dir.path().join("none")), Err(AppError::Io { .. })));
    assert!(matches!(save_model(&init_network(&Architecture::reference_cnn(), 1).unwrap(), &norm(), dir.path().join("no/such/dir/m")), Err(AppError::Io { .. })));
}

/// Weights that push every input into the trigger class with certainty.
fn always_smoke() -> Network {
    let mut net = Network::zeros(&Architecture::reference_cnn()).unwrap();
    let mut params = net.params();
    let n = params.len();
    params[n - 4 + ActivityClass::Smoke.index()] = 20.0;
    net.set_params(&params).unwrap();
    net
}

fn session(port: u16, lines: &[&str]) -> Vec<serde_json::Value> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    for l in lines {
        writeln!(stream, "{l}").unwrap();
    }
    stream.shutdown(std::net::Shutdown::Write).unwrap();
    BufReader::new(stream).lines().map(|l| serde_json::from_str(&l.unwrap()).unwrap()).collect()
}

#[test]
fn tcp_sessions_are_isolated() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let server = thread::spawn(move || serve_tcp(listener, Arc::new(always_smoke()), norm(), AlertRule::default(), Some(2)));

    let line = "310,205,180,95,140,1450";
    let a = thread::spawn(move || session(port, &[line, line]));
    let b = thread::spawn(move || session(port, &[line, "oops", line, line, line]));
    let a = a.join().unwrap();
    let b = b.join().unwrap();
    server.join().unwrap().unwrap();

    // two hits on one connection never fire; the other reaches three on its own
    assert_eq!(a.len(), 2);
    assert!(a.iter().all(|v| v.get("alert").is_none()));
    let alerts: Vec<_> = b.iter().filter(|v| v.get("alert").is_some()).collect();
    assert_eq!(alerts.len(), 1);
    assert_eq!(alerts[0]["consecutive"], 3);
    assert_eq!(b.len(), 6);
    assert_eq!(b[1], serde_json::json!({"error": "parse", "line": 2}));
}
