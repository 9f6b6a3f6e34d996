//! Line-delimited streaming inference over stdin/stdout or TCP.
//!
//! Every input line produces exactly one output line: a prediction record
//! or `{"error":"parse","line":N}`. Alert lines are interleaved after the
//! prediction that fired them.

use std::collections::VecDeque;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use aqnn_core::data::{apply_normalizer, ActivityClass, NormStats, SensorSample};
use aqnn_core::nn::Network;
use aqnn_core::{Error, NUM_CLASSES, NUM_SENSORS};
use serde_json::{json, Value};

use crate::bench::LatencyStats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlertRule {
    pub trigger: ActivityClass,
    pub threshold: f32,
    pub count: usize,
}

impl Default for AlertRule {
    fn default() -> Self {
        Self { trigger: ActivityClass::Smoke, threshold: 0.8, count: 3 }
    }
}

impl AlertRule {
    pub fn validate(&self) -> aqnn_core::Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!("alert threshold must lie in (0, 1], got {}", self.threshold)));
        }
        if self.count == 0 {
            return Err(Error::InvalidArgument("alert count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alert {
    pub consecutive: usize,
    pub prob: f32,
}

/// Fires once after `count` consecutive confident trigger predictions.
/// A confident streak that is broken by a low-probability trigger
/// prediction restarts the count; only a prediction of another class
/// re-arms the rule.
#[derive(Debug, Clone)]
pub struct AlertState {
    rule: AlertRule,
    consecutive: usize,
    armed: bool,
}

impl AlertState {
    pub fn new(rule: AlertRule) -> Self {
        Self { rule, consecutive: 0, armed: true }
    }

    pub fn observe(&mut self, class: usize, probs: &[f32]) -> Option<Alert> {
        let trigger = self.rule.trigger.index();
        if class != trigger {
            self.consecutive = 0;
            self.armed = true;
            return None;
        }
        let prob = probs[trigger];
        if prob < self.rule.threshold {
            self.consecutive = 0;
            return None;
        }
        self.consecutive += 1;
        if self.armed && self.consecutive >= self.rule.count {
            self.armed = false;
            return Some(Alert { consecutive: self.consecutive, prob });
        }
        None
    }
}

/// Parses `a,b,c,d,e,f` or `{"readings":[a,b,c,d,e,f]}`.
pub fn parse_line(line: &str) -> Option<[f32; NUM_SENSORS]> {
    let line = line.trim();
    let mut out = [0.0f32; NUM_SENSORS];
    if line.starts_with('{') {
        let v: Value = serde_json::from_str(line).ok()?;
        let arr = v.get("readings")?.as_array()?;
        if arr.len() != NUM_SENSORS {
            return None;
        }
        for (slot, x) in out.iter_mut().zip(arr) {
            *slot = x.as_f64()? as f32;
        }
    } else {
        let mut fields = line.split(',');
        for slot in out.iter_mut() {
            *slot = fields.next()?.trim().parse().ok()?;
        }
        if fields.next().is_some() {
            return None;
        }
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Latency samples kept for percentiles; the mean covers every line.
const LATENCY_WINDOW: usize = 100_000;

#[derive(Debug, Clone, Default)]
pub struct SessionStats {
    pub class_counts: [u64; NUM_CLASSES],
    pub errors: u64,
    pub alerts: u64,
    latency_sum_us: f64,
    recent_us: VecDeque<f64>,
}

impl SessionStats {
    pub fn predictions(&self) -> u64 {
        self.class_counts.iter().sum()
    }

    pub fn lines(&self) -> u64 {
        self.predictions() + self.errors
    }

    fn record_latency(&mut self, us: f64) {
        self.latency_sum_us += us;
        if self.recent_us.len() == LATENCY_WINDOW {
            self.recent_us.pop_front();
        }
        self.recent_us.push_back(us);
    }

    pub fn mean_latency_us(&self) -> f64 {
        match self.predictions() {
            0 => 0.0,
            n => self.latency_sum_us / n as f64,
        }
    }

    pub fn p99_latency_us(&self) -> f64 {
        let recent: Vec<f64> = self.recent_us.iter().copied().collect();
        LatencyStats::from_durations(&recent).map_or(0.0, |s| s.p99)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("summary lines={} predictions={} errors={}", self.lines(), self.predictions(), self.errors);
        for c in ActivityClass::ALL {
            s.push_str(&format!(" {}={}", c.tag(), self.class_counts[c.index()]));
        }
        s.push_str(&format!(
            " alerts={} mean_latency_us={:.3} p99_latency_us={:.3}",
            self.alerts,
            self.mean_latency_us(),
            self.p99_latency_us()
        ));
        s
    }
}

/// JSON number with the shortest decimal form of the f32, so 88.2 stays 88.2.
pub(crate) fn short(v: f32) -> f64 {
    v.to_string().parse().unwrap_or(f64::from(v))
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Per-stream state: line counter, alert automaton and statistics.
pub struct Session<'a> {
    net: &'a Network,
    norm: &'a NormStats,
    alerts: AlertState,
    stats: SessionStats,
    line_no: u64,
}

impl<'a> Session<'a> {
    pub fn new(net: &'a Network, norm: &'a NormStats, rule: AlertRule) -> Self {
        Self { net, norm, alerts: AlertState::new(rule), stats: SessionStats::default(), line_no: 0 }
    }

    pub fn stats(&self) -> &SessionStats {
        &self.stats
    }

    pub fn into_stats(self) -> SessionStats {
        self.stats
    }

    /// Output lines for one input line.
    pub fn handle_line(&mut self, line: &str) -> Vec<String> {
        self.line_no += 1;
        let Some(readings) = parse_line(line) else {
            self.stats.errors += 1;
            return vec![json!({"error": "parse", "line": self.line_no}).to_string()];
        };
        let start = Instant::now();
        let sample = SensorSample { readings, label: None };
        let result = self.net.predict(&apply_normalizer(&sample, self.norm));
        let latency_us = start.elapsed().as_nanos().max(1) as f64 / 1e3;
        let (class, probs) = match result {
            Ok(p) => p,
            Err(_) => {
                self.stats.errors += 1;
                return vec![json!({"error": "inference", "line": self.line_no}).to_string()];
            }
        };
        self.stats.class_counts[class] += 1;
        self.stats.record_latency(latency_us);
        let ts = now_ms();
        let mut out = vec![json!({
            "ts": ts,
            "readings": readings.map(short),
            "class_index": class,
            "class_name": ActivityClass::from_index(class).map_or("unknown", |c| c.name()),
            "probs": probs.iter().copied().map(short).collect::<Vec<_>>(),
            "latency_us": latency_us,
        })
        .to_string()];
        if let Some(alert) = self.alerts.observe(class, &probs) {
            self.stats.alerts += 1;
            out.push(
                json!({
                    "ts": ts,
                    "alert": self.alerts.rule.trigger.tag(),
                    "consecutive": alert.consecutive,
                    "prob": short(alert.prob),
                })
                .to_string(),
            );
        }
        out
    }
}

/// Runs one session until end of input, flushing after every line.
pub fn serve_stream(
    net: &Network,
    norm: &NormStats,
    rule: AlertRule,
    mut input: impl BufRead,
    mut output: impl Write,
) -> io::Result<SessionStats> {
    let mut session = Session::new(net, norm, rule);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let text = String::from_utf8_lossy(&buf);
        let line = text.trim_end_matches(['\n', '\r']);
        for out in session.handle_line(line) {
            writeln!(output, "{out}")?;
        }
        output.flush()?;
    }
    Ok(session.into_stats())
}

fn handle_connection(stream: TcpStream, net: &Network, norm: &NormStats, rule: AlertRule) -> io::Result<SessionStats> {
    let reader = BufReader::new(stream.try_clone()?);
    serve_stream(net, norm, rule, reader, BufWriter::new(stream))
}

/// Accepts connections, one thread each, sharing the model read-only.
/// With `max_connections` set, returns after that many sessions finish.
pub fn serve_tcp(
    listener: TcpListener,
    net: Arc<Network>,
    norm: NormStats,
    rule: AlertRule,
    max_connections: Option<usize>,
) -> io::Result<()> {
    let mut handles = Vec::new();
    let incoming = listener.incoming().take(max_connections.unwrap_or(usize::MAX));
    for stream in incoming {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                eprintln!("accept failed: {e}");
                continue;
            }
        };
        let net = Arc::clone(&net);
        let peer = stream.peer_addr().map_or_else(|_| "?".to_string(), |a| a.to_string());
        let handle = thread::spawn(move || match handle_connection(stream, &net, &norm, rule) {
            Ok(stats) => eprintln!("{peer} {}", stats.summary()),
            Err(e) => eprintln!("{peer} connection error: {e}"),
        });
        if max_connections.is_some() {
            handles.push(handle);
        }
    }
    for h in handles {
        let _ = h.join();
    }
    Ok(())
}
