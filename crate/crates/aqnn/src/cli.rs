//! Command-line front end. Exit codes: 0 success, 1 usage, 2 data or model.

use std::ffi::OsString;
use std::io::{self, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use aqnn_core::baselines::{KnnModel, DEFAULT_K};
use aqnn_core::data::{synth_generate, ActivityClass, Dataset, Examples, SplitSpec};
use aqnn_core::metrics::evaluate_examples;
use aqnn_core::nn::{AdamConfig, Architecture, FeatureMap, Network};
use aqnn_core::train::TrainConfig;
use clap::{Args, Parser, Subcommand};

use crate::bench::latency_benchmark;
use crate::csv_io::{load_csv, load_unlabeled, write_csv, write_dataset};
use crate::error::{io_err, AppError, Result};
use crate::history::export_history;
use crate::model_file::{load_model, save_model};
use crate::pipeline::{prepare, progress_line, run_training, RunConfig};
use crate::report::{confusion_csv, report_json};
use crate::serve::{serve_stream, serve_tcp, AlertRule};

#[derive(Debug, Parser)]
#[command(name = "aqnn", version, about = "Indoor air-quality activity classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the CNN and save the best-validation checkpoint.
    Train(TrainArgs),
    /// Classification report and confusion matrix for a labeled CSV.
    Eval(EvalArgs),
    /// Predict classes for rows of six readings, one JSON line each.
    Predict(PredictArgs),
    /// Stream predictions for lines on stdin or a TCP port.
    Serve(ServeArgs),
    /// Write a synthetic labeled dataset.
    Synth(SynthArgs),
    /// Single-sample inference latency.
    Bench(BenchArgs),
    /// Reference classifiers on the same splits.
    #[command(subcommand)]
    Baseline(Baseline),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = "AQNN_SEED", default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch: u64,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f32,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Suppress per-epoch progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long, env = "AQNN_MODEL", default_value = "model.aqnn")]
    pub out: PathBuf,
    #[arg(long, default_value = "history.csv")]
    pub history: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelArg {
    #[arg(long, env = "AQNN_MODEL", default_value = "model.aqnn")]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub data: PathBuf,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Also write the confusion matrix as a CSV grid.
    #[arg(long)]
    pub cm_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub data: PathBuf,
    /// Drop a seventh label column instead of refusing the file.
    #[arg(long)]
    pub ignore_labels: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Listen on this TCP port instead of reading stdin.
    #[arg(long, env = "AQNN_PORT")]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "AQNN_ALERT_THRESHOLD", default_value_t = 0.8)]
    pub threshold: f32,
    #[arg(long, default_value_t = 3)]
    pub alert_count: usize,
    /// Class that raises alerts: normal, meals, smoke or cleaning.
    #[arg(long, default_value = "smoke", value_parser = parse_class)]
    pub trigger: ActivityClass,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 300)]
    pub per_class: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(100..))]
    pub iterations: u64,
    /// Readings to time on; synthetic samples when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Subcommand)]
pub enum Baseline {
    /// k-nearest neighbours on normalized readings.
    Knn {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Dense network trained like the CNN.
    Mlp {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        history: Option<PathBuf>,
    },
}

fn parse_class(s: &str) -> std::result::Result<ActivityClass, String> {
    ActivityClass::ALL
        .into_iter()
        .find(|c| c.tag() == s || c.index().to_string() == s)
        .ok_or_else(|| format!("unknown class {s:?}; expected normal, meals, smoke or cleaning"))
}

fn stdout_err(e: io::Error) -> AppError {
    AppError::Io { path: "<stdout>".into(), source: e }
}

fn load_data(path: &Path) -> Result<Dataset> {
    let ds = load_csv(path)?;
    eprintln!("loaded {} samples from {}", ds.len(), path.display());
    Ok(ds)
}

fn train_config(fit: &FitArgs) -> RunConfig {
    let train = TrainConfig {
        epochs: fit.epochs as usize,
        batch_size: fit.batch as usize,
        adam: AdamConfig { lr: fit.lr, ..AdamConfig::default() },
        ..TrainConfig::default()
    };
    RunConfig::seeded(fit.seed.seed, train)
}

fn print_split(out: &mut impl Write, title: &str, net: &Network, ex: &Examples) -> Result<()> {
    if ex.is_empty() {
        writeln!(out, "== {title} ==\n(empty split)\n").map_err(stdout_err)?;
        return Ok(());
    }
    let ev = evaluate_examples(net, ex)?;
    writeln!(out, "== {title} ({} samples) ==\n{}mean loss {:.4}\n", ex.len(), ev.report, ev.mean_loss)
        .map_err(stdout_err)
}

fn fit_and_report(arch: &Architecture, fit: &FitArgs, out_path: Option<&Path>, history: Option<&Path>) -> Result<()> {
    let ds = load_data(&fit.data)?;
    let cfg = train_config(fit);
    let quiet = fit.quiet;
    let run = run_training(arch, &ds, &cfg, &mut |m| {
        if !quiet {
            eprintln!("{}", progress_line(m));
        }
    })?;
    let mut out = io::stdout().lock();
    writeln!(out, "best epoch {} val_acc {:.4}", run.outcome.best.epoch, run.outcome.best.val_acc).map_err(stdout_err)?;
    if let Some(path) = out_path {
        let bytes = save_model(&run.net, &run.data.norm, path)?;
        writeln!(out, "saved {} parameters ({bytes} bytes) to {}", run.net.count_params(), path.display())
            .map_err(stdout_err)?;
    }
    if let Some(path) = history {
        export_history(&run.outcome.history, path)?;
        writeln!(out, "history written to {}", path.display()).map_err(stdout_err)?;
    }
    writeln!(out).map_err(stdout_err)?;
    print_split(&mut out, "validation", &run.net, &run.data.val)?;
    print_split(&mut out, "test", &run.net, &run.data.test)
}

fn eval(args: &EvalArgs) -> Result<()> {
    let (net, norm) = load_model(&args.model.model)?;
    let ds = load_data(&args.data)?;
    let ev = evaluate_examples(&net, &ds.to_examples(&norm)?)?;
    let grid = confusion_csv(&ev.confusion);
    if let Some(path) = &args.cm_csv {
        std::fs::write(path, &grid).map_err(io_err(path))?;
    }
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report_json(&ev.report, ev.mean_loss)).expect("json"))
    } else {
        write!(out, "{}\nmean loss {:.4}\n\nconfusion matrix (rows true, columns predicted)\n{grid}", ev.report, ev.mean_loss)
    }
    .map_err(stdout_err)
}

fn predict(args: &PredictArgs) -> Result<()> {
    let (net, norm) = load_model(&args.model.model)?;
    let rows = load_unlabeled(&args.data, args.ignore_labels)?;
    let mut out = io::BufWriter::new(io::stdout().lock());
    for (i, readings) in rows.iter().enumerate() {
        let x = FeatureMap::column(&norm.normalize(readings))?;
        let (class, probs) = net.predict(&x)?;
        let name = ActivityClass::from_index(class).map_or("unknown", |c| c.name());
        let rec = serde_json::json!({"row": i + 1, "class_index": class, "class_name": name, "probs": probs.iter().copied().map(crate::serve::short).collect::<Vec<_>>()});
        writeln!(out, "{rec}").map_err(stdout_err)?;
    }
    out.flush().map_err(stdout_err)
}

fn serve(args: &ServeArgs) -> Result<()> {
    let rule = AlertRule { trigger: args.trigger, threshold: args.threshold, count: args.alert_count };
    rule.validate()?;
    let (net, norm) = load_model(&args.model.model)?;
    match args.port {
        None => {
            let stdin = io::stdin().lock();
            let stdout = io::BufWriter::new(io::stdout().lock());
            let stats = serve_stream(&net, &norm, rule, stdin, stdout).map_err(stdout_err)?;
            eprintln!("{}", stats.summary());
            Ok(())
        }
        Some(port) => {
            let addr = format!("{}:{port}", args.host);
            let listener = TcpListener::bind(&addr).map_err(io_err(&addr))?;
            eprintln!("listening on {}", listener.local_addr().map_err(io_err(&addr))?);
            serve_tcp(listener, Arc::new(net), norm, rule, None).map_err(io_err(&addr))
        }
    }
}

fn synth(args: &SynthArgs) -> Result<()> {
    let ds = synth_generate(args.per_class, args.seed.seed)?;
    match &args.out {
        Some(path) => write_csv(&ds, path),
        None => write_dataset(&ds, io::stdout().lock()).map_err(stdout_err),
    }
}

fn bench(args: &BenchArgs) -> Result<()> {
    let (net, norm) = load_model(&args.model.model)?;
    let readings: Vec<[f32; 6]> = match &args.data {
        Some(path) => load_unlabeled(path, true)?,
        None => synth_generate(25, args.seed.seed)?.samples.iter().map(|s| s.readings).collect(),
    };
    let samples = readings
        .iter()
        .map(|r| FeatureMap::column(&norm.normalize(r)))
        .collect::<aqnn_core::Result<Vec<_>>>()?;
    let s = latency_benchmark(&net, &samples, args.iterations as usize)?;
    println!(
        "mean_ms={:.4} p50_ms={:.4} p99_ms={:.4} max_ms={:.4} count={}",
        s.mean * 1e3,
        s.p50 * 1e3,
        s.p99 * 1e3,
        s.max * 1e3,
        s.count
    );
    Ok(())
}

fn knn(data: &Path, k: usize, seed: u64) -> Result<()> {
    let ds = load_data(data)?;
    let prepared = prepare(&ds, &SplitSpec { seed, ..SplitSpec::default() })?;
    let model = KnnModel::fit(&prepared.train, k)?;
    for (name, ex) in [("validation", &prepared.val), ("test", &prepared.test)] {
        if ex.is_empty() {
            println!("{name}: empty split");
        } else {
            println!("{name} accuracy {:.4} (k={k}, {} samples)", aqnn_core::baselines::knn_accuracy(&model, ex)?, ex.len());
        }
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => fit_and_report(&Architecture::reference_cnn(), &a.fit, Some(&a.out), Some(&a.history)),
        Command::Eval(a) => eval(a),
        Command::Predict(a) => predict(a),
        Command::Serve(a) => serve(a),
        Command::Synth(a) => synth(a),
        Command::Bench(a) => bench(a),
        Command::Baseline(Baseline::Knn { data, k, seed }) => knn(data, *k, seed.seed),
        Command::Baseline(Baseline::Mlp { fit, out, history }) => {
            fit_and_report(&Architecture::reference_mlp(), fit, out.as_deref(), history.as_deref())
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        // a closed downstream pipe (`aqnn predict ... | head`) is not a failure
        Err(AppError::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

