//! Flat-file persistence: RFC-4180 CSV bodies with `\n` terminators and
//! 17-significant-digit floats. Re-running a stage with the same
//! configuration reproduces every file byte for byte.

use crate::engine::ValueFlag;
use henon_core::classify::Label;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("CSV error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("malformed field in {path}: {detail}")]
    Malformed { path: String, detail: String },
}

fn io_err(path: &Path, source: std::io::Error) -> StoreError {
    StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, source: csv::Error) -> StoreError {
    StoreError::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn malformed(path: &Path, detail: impl Into<String>) -> StoreError {
    StoreError::Malformed {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

/// 17-significant-digit decimal form; round-trips every finite f64.
pub fn float17(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, StoreError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn reader(path: &Path) -> Result<csv::Reader<BufReader<File>>, StoreError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    Ok(csv::Reader::from_reader(BufReader::new(file)))
}

/// Parse a survival table from any reader (the path only labels errors).
pub fn parse_survival<R: std::io::Read>(r: R, label: &Path) -> Result<Vec<SurvivalRow>, StoreError> {
    read_survival_records(csv::Reader::from_reader(r), label)
}

/// Parse an indicator series from any reader (the path only labels errors).
pub fn parse_series<R: std::io::Read>(r: R, label: &Path) -> Result<Vec<SeriesRow>, StoreError> {
    read_series_records(csv::Reader::from_reader(r), label)
}

fn parse_f64(path: &Path, s: &str) -> Result<f64, StoreError> {
    s.parse()
        .map_err(|_| malformed(path, format!("bad float {s:?}")))
}

fn parse_u64(path: &Path, s: &str) -> Result<u64, StoreError> {
    s.parse()
        .map_err(|_| malformed(path, format!("bad integer {s:?}")))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalRow {
    pub orbit_id: u64,
    pub x: f64,
    pub y: f64,
    pub survived: bool,
    pub n_stab: Option<u64>,
}

pub fn write_survival(path: &Path, rows: &[SurvivalRow]) -> Result<(), StoreError> {
    let mut w = writer(path)?;
    w.write_record(["orbit_id", "x", "y", "survived", "n_stab"])
        .map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.orbit_id.to_string(),
            float17(r.x),
            float17(r.y),
            r.survived.to_string(),
            r.n_stab.map(|n| n.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_survival(path: &Path) -> Result<Vec<SurvivalRow>, StoreError> {
    read_survival_records(reader(path)?, path)
}

fn read_survival_records<R: std::io::Read>(
    mut rdr: csv::Reader<R>,
    path: &Path,
) -> Result<Vec<SurvivalRow>, StoreError> {
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != 5 {
            return Err(malformed(path, format!("expected 5 fields, got {}", rec.len())));
        }
        let n_stab = match &rec[4] {
            "" => None,
            s => Some(parse_u64(path, s)?),
        };
        out.push(SurvivalRow {
            orbit_id: parse_u64(path, &rec[0])?,
            x: parse_f64(path, &rec[1])?,
            y: parse_f64(path, &rec[2])?,
            survived: match &rec[3] {
                "true" => true,
                "false" => false,
                s => return Err(malformed(path, format!("bad bool {s:?}"))),
            },
            n_stab,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow {
    pub orbit_id: u64,
    pub n: u64,
    /// Absent when the flag is `Unavailable`.
    pub value: Option<f64>,
    pub flag: ValueFlag,
}

pub fn write_series(path: &Path, rows: &[SeriesRow]) -> Result<(), StoreError> {
    let mut w = writer(path)?;
    w.write_record(["orbit_id", "n", "value", "saturated_flag"])
        .map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.orbit_id.to_string(),
            r.n.to_string(),
            r.value.map(float17).unwrap_or_default(),
            r.flag.as_str().to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_series(path: &Path) -> Result<Vec<SeriesRow>, StoreError> {
    read_series_records(reader(path)?, path)
}

fn read_series_records<R: std::io::Read>(
    mut rdr: csv::Reader<R>,
    path: &Path,
) -> Result<Vec<SeriesRow>, StoreError> {
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != 4 {
            return Err(malformed(path, format!("expected 4 fields, got {}", rec.len())));
        }
        let value = match &rec[2] {
            "" => None,
            s => Some(parse_f64(path, s)?),
        };
        let flag = ValueFlag::parse(&rec[3])
            .ok_or_else(|| malformed(path, format!("bad flag {:?}", &rec[3])))?;
        out.push(SeriesRow {
            orbit_id: parse_u64(path, &rec[0])?,
            n: parse_u64(path, &rec[1])?,
            value,
            flag,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GtRow {
    pub orbit_id: u64,
    pub label: Label,
}

pub fn write_gt(path: &Path, rows: &[GtRow]) -> Result<(), StoreError> {
    let mut w = writer(path)?;
    w.write_record(["orbit_id", "label"])
        .map_err(|e| csv_err(path, e))?;
    for r in rows {
        let label = match r.label {
            Label::Regular => "regular",
            Label::Chaotic => "chaotic",
        };
        w.write_record([r.orbit_id.to_string(), label.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_gt(path: &Path) -> Result<Vec<GtRow>, StoreError> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let label = match &rec[1] {
            "regular" => Label::Regular,
            "chaotic" => Label::Chaotic,
            s => return Err(malformed(path, format!("bad label {s:?}"))),
        };
        out.push(GtRow {
            orbit_id: parse_u64(path, &rec[0])?,
            label,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportRow {
    pub n: u64,
    pub threshold: Option<f64>,
    pub accuracy: Option<f64>,
    pub fp_rate: Option<f64>,
    pub fn_rate: Option<f64>,
}

pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<(), StoreError> {
    let mut w = writer(path)?;
    w.write_record(["n", "threshold", "accuracy", "fp_rate", "fn_rate"])
        .map_err(|e| csv_err(path, e))?;
    let opt = |v: Option<f64>| v.map(float17).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.n.to_string(),
            opt(r.threshold),
            opt(r.accuracy),
            opt(r.fp_rate),
            opt(r.fn_rate),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>, StoreError> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let opt = |s: &str| -> Result<Option<f64>, StoreError> {
            Ok(match s {
                "" => None,
                v => Some(parse_f64(path, v)?),
            })
        };
        out.push(ReportRow {
            n: parse_u64(path, &rec[0])?,
            threshold: opt(&rec[1])?,
            accuracy: opt(&rec[2])?,
            fp_rate: opt(&rec[3])?,
            fn_rate: opt(&rec[4])?,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistRow {
    pub n: u64,
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    pub threshold: Option<f64>,
}

pub fn write_histogram(path: &Path, rows: &[HistRow]) -> Result<(), StoreError> {
    let mut w = writer(path)?;
    w.write_record(["n", "bin_left", "bin_right", "count", "threshold"])
        .map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            float17(r.bin_left),
            float17(r.bin_right),
            r.count.to_string(),
            r.threshold.map(float17).unwrap_or_default(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float17_round_trips() {
        for v in [0.0, 1.0, -1.5, 1.0 / 3.0, 1e-300, 2.2250738585072014e-308, 1.23e154] {
            let s = float17(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, v, "{s}");
        }
    }

    #[test]
    fn survival_round_trip_and_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("survival.csv");
        let rows = vec![
            SurvivalRow {
                orbit_id: 0,
                x: 0.1,
                y: 0.2,
                survived: true,
                n_stab: None,
            },
            SurvivalRow {
                orbit_id: 1,
                x: 0.3,
                y: 0.4,
                survived: false,
                n_stab: Some(123),
            },
        ];
        write_survival(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("orbit_id,x,y,survived,n_stab\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_survival(&path).unwrap(), rows);
    }

    #[test]
    fn series_round_trip_with_unavailable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rem.csv");
        let rows = vec![
            SeriesRow {
                orbit_id: 7,
                n: 100,
                value: Some(1.25e-9),
                flag: ValueFlag::Ok,
            },
            SeriesRow {
                orbit_id: 7,
                n: 1000,
                value: None,
                flag: ValueFlag::Unavailable,
            },
            SeriesRow {
                orbit_id: 8,
                n: 100,
                value: Some(3.5e150),
                flag: ValueFlag::Saturated,
            },
        ];
        write_series(&path, &rows).unwrap();
        assert_eq!(read_series(&path).unwrap(), rows);
    }

    #[test]
    fn report_round_trip_with_failures() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let rows = vec![
            ReportRow {
                n: 100,
                threshold: None,
                accuracy: None,
                fp_rate: None,
                fn_rate: None,
            },
            ReportRow {
                n: 1000,
                threshold: Some(-4.25),
                accuracy: Some(0.97),
                fp_rate: Some(0.01),
                fn_rate: Some(0.2),
            },
        ];
        write_report(&path, &rows).unwrap();
        assert_eq!(read_report(&path).unwrap(), rows);
    }
}
