//! Sensor CSV files: six readings, optionally followed by an integer label.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use aqnn_core::data::{ActivityClass, Dataset, Provenance, SensorSample, SENSOR_NAMES};
use aqnn_core::NUM_SENSORS;
use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::{io_err, AppError, Result};

fn parse_err(line: u64, message: impl Into<String>) -> AppError {
    AppError::Parse { line, message: message.into() }
}

/// Yields `(line, record)` for every data row, skipping a header if the
/// first field of the first row is not a number.
fn rows(reader: impl Read) -> impl Iterator<Item = Result<(u64, StringRecord)>> {
    let mut rdr = ReaderBuilder::new().has_headers(false).flexible(true).trim(Trim::All).from_reader(reader);
    let mut first = true;
    let mut out = Vec::new();
    let mut record = StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                if std::mem::take(&mut first) && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
                    continue;
                }
                out.push(Ok((line, record.clone())));
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                out.push(Err(parse_err(line, e.to_string())));
                break;
            }
        }
    }
    out.into_iter()
}

fn parse_readings(line: u64, fields: &StringRecord) -> Result<[f32; NUM_SENSORS]> {
    let mut readings = [0.0f32; NUM_SENSORS];
    for (i, (slot, field)) in readings.iter_mut().zip(fields.iter()).enumerate() {
        let v: f32 = field
            .parse()
            .map_err(|_| parse_err(line, format!("column {} ({}): {field:?} is not a number", i + 1, SENSOR_NAMES[i])))?;
        if !v.is_finite() {
            return Err(parse_err(line, format!("column {} ({}) is not finite", i + 1, SENSOR_NAMES[i])));
        }
        *slot = v;
    }
    Ok(readings)
}

fn parse_label(line: u64, field: &str) -> Result<ActivityClass> {
    field
        .parse::<usize>()
        .ok()
        .and_then(ActivityClass::from_index)
        .ok_or_else(|| parse_err(line, format!("label {field:?} is not one of 0, 1, 2, 3")))
}

/// Reads a labeled dataset (7 columns per row).
pub fn read_labeled(reader: impl Read) -> Result<Dataset> {
    let mut samples = Vec::new();
    for row in rows(reader) {
        let (line, rec) = row?;
        if rec.len() != NUM_SENSORS + 1 {
            return Err(parse_err(line, format!("expected {} values, found {}", NUM_SENSORS + 1, rec.len())));
        }
        let readings = parse_readings(line, &rec)?;
        let label = parse_label(line, &rec[NUM_SENSORS])?;
        samples.push(SensorSample { readings, label: Some(label) });
    }
    Ok(Dataset::new(samples, Provenance::File))
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    read_labeled(File::open(path).map_err(io_err(path))?)
}

/// Reads rows of bare readings. A seventh column is refused unless
/// `ignore_labels` is set, in which case it is dropped.
pub fn read_unlabeled(reader: impl Read, ignore_labels: bool) -> Result<Vec<[f32; NUM_SENSORS]>> {
    let mut out = Vec::new();
    for row in rows(reader) {
        let (line, rec) = row?;
        match rec.len() {
            NUM_SENSORS => {}
            n if n == NUM_SENSORS + 1 && !ignore_labels => {
                return Err(parse_err(line, "labeled data passed to predict (use --ignore-labels)"));
            }
            n if n == NUM_SENSORS + 1 => {}
            n => return Err(parse_err(line, format!("expected {NUM_SENSORS} values, found {n}"))),
        }
        out.push(parse_readings(line, &rec)?);
    }
    Ok(out)
}

pub fn load_unlabeled(path: impl AsRef<Path>, ignore_labels: bool) -> Result<Vec<[f32; NUM_SENSORS]>> {
    let path = path.as_ref();
    read_unlabeled(File::open(path).map_err(io_err(path))?, ignore_labels)
}

/// Writes a header plus one row per sample. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_dataset(ds: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{},label", SENSOR_NAMES.join(","))?;
    for s in &ds.samples {
        let mut line = s.readings.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        if let Some(label) = s.label {
            line.push(',');
            line.push_str(&label.index().to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = std::io::BufWriter::new(file);
    write_dataset(ds, &mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_row() {
        let ds = read_labeled("120.5,88.2,240.1,95.0,110.3,410.7,2\n".as_bytes()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.samples[0].readings, [120.5, 88.2, 240.1, 95.0, 110.3, 410.7]);
        assert_eq!(ds.samples[0].label, Some(ActivityClass::Smoke));
    }

    #[test]
    fn skips_header_and_blank_lines() {
        let text = "MQ2,MQ9,MQ135,MQ137,MQ138,MG-811,label\n1,2,3,4,5,6,0\n\n 7, 8,9,10,11,12 ,3\n";
        let ds = read_labeled(text.as_bytes()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.samples[1].label, Some(ActivityClass::Cleaning));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = read_labeled("h,h,h,h,h,h,h\n1,2,3,4,5,6,0\n1,2,3,4,5,6\n".as_bytes()).unwrap_err();
        match err {
            AppError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("expected 7 values"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let err = read_labeled("1,2,3,4,5,6,4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, AppError::Parse { line: 1, .. }));
        let err = read_labeled("1,2,x,4,5,6,1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("MQ135"));
        assert!(read_labeled("1,2,3,4,5,NaN,1\n".as_bytes()).is_err());
    }

    #[test]
    fn predict_input_guard() {
        let labeled = "1,2,3,4,5,6,1\n";
        let err = read_unlabeled(labeled.as_bytes(), false).unwrap_err();
        assert!(err.to_string().contains("labeled data passed to predict"));
        assert_eq!(read_unlabeled(labeled.as_bytes(), true).unwrap(), vec![[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]]);
        assert!(read_unlabeled("1,2,3\n".as_bytes(), true).is_err());
    }

    #[test]
    fn round_trip() {
        let ds = aqnn_core::data::synth_generate(20, 4).unwrap();
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let back = read_labeled(buf.as_slice()).unwrap();
        assert_eq!(back.samples, ds.samples);
    }

    #[test]
    fn missing_file_is_io() {
        assert!(matches!(load_csv("/nonexistent/air.csv"), Err(AppError::Io { .. })));
    }
}
