//! Per-epoch training history as CSV.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use aqnn_core::train::EpochMetrics;

use crate::error::{io_err, AppError, Result};

pub const HISTORY_HEADER: &str = "epoch,train_loss,train_acc,val_loss,val_acc";

pub fn write_history(history: &[EpochMetrics], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{HISTORY_HEADER}")?;
    for m in history {
        writeln!(out, "{},{},{},{},{}", m.epoch, m.train_loss, m.train_acc, m.val_loss, m.val_acc)?;
    }
    Ok(())
}

pub fn export_history(history: &[EpochMetrics], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if history.is_empty() {
        return Err(aqnn_core::Error::InvalidArgument("history is empty".into()).into());
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    write_history(history, &mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn read_history(reader: impl Read) -> Result<Vec<EpochMetrics>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| AppError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| AppError::Parse { line, message };
        if rec.len() != 5 {
            return Err(bad(format!("expected 5 values, found {}", rec.len())));
        }
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(format!("{:?} is not a number", &rec[i])));
        out.push(EpochMetrics {
            epoch: rec[0].parse().map_err(|_| bad(format!("{:?} is not an epoch", &rec[0])))?,
            train_loss: f(1)?,
            train_acc: f(2)?,
            val_loss: f(3)?,
            val_acc: f(4)?,
        });
    }
    Ok(out)
}

pub fn load_history(path: impl AsRef<Path>) -> Result<Vec<EpochMetrics>> {
    let path = path.as_ref();
    read_history(File::open(path).map_err(io_err(path))?)
}
