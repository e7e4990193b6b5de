//! Labelled dataset readers: CSV with a trailing `label` column, and
//! svmlight/libsvm sparse rows.

use std::fs;
use std::path::Path;

use margin_core::classify::LabeledDataset;
use margin_core::kernels::Point;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}")]
    Io { path: String, source: std::io::Error },
    #[error("no data rows")]
    Empty,
    #[error("csv header must end with a `label` column")]
    MissingLabelColumn,
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: label {value:?} is not one of 0, -1, 1, +1")]
    BadLabel { line: u64, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svmlight,
}

impl Format {
    /// `.svm`, `.svmlight` and `.libsvm` files are sparse; anything else is
    /// CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("svm" | "svmlight" | "libsvm") => Format::Svmlight,
            _ => Format::Csv,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "svmlight" | "libsvm" => Ok(Format::Svmlight),
            other => Err(format!("unknown format {other:?} (expected csv or svmlight)")),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn ingest(path: &Path, format: Option<Format>) -> Result<LabeledDataset, IngestError> {
    let text = read_text(path)?;
    match format.unwrap_or_else(|| Format::from_path(path)) {
        Format::Csv => parse_csv(&text),
        Format::Svmlight => parse_svmlight(&text, None),
    }
}

fn parse_label(raw: &str, line: u64) -> Result<f64, IngestError> {
    let bad = || IngestError::BadLabel {
        line,
        value: raw.to_string(),
    };
    let v: f64 = raw.trim().parse().map_err(|_| bad())?;
    if v == 1.0 {
        Ok(1.0)
    } else if v == 0.0 || v == -1.0 {
        Ok(-1.0)
    } else {
        Err(bad())
    }
}

fn parse_value(raw: &str, line: u64) -> Result<f64, IngestError> {
    let v: f64 = raw.trim().parse().map_err(|_| IngestError::Malformed {
        line,
        message: format!("{raw:?} is not a number"),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(IngestError::Malformed {
            line,
            message: format!("{raw:?} is not finite"),
        })
    }
}

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::Malformed {
        line,
        message: e.to_string(),
    }
}

/// Numeric CSV table: header names and rows with their line numbers.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<(u64, Vec<f64>)>,
}

pub fn parse_table(text: &str) -> Result<Table, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(String::from).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(IngestError::Empty);
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let values = record
            .iter()
            .map(|v| parse_value(v, line))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(Table { header, rows })
}

pub fn parse_csv(text: &str) -> Result<LabeledDataset, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.iter().next_back() != Some("label") {
        return Err(if text.trim().is_empty() {
            IngestError::Empty
        } else {
            IngestError::MissingLabelColumn
        });
    }
    let dims = header.len() - 1;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let x = (0..dims)
            .map(|j| parse_value(&record[j], line))
            .collect::<Result<Vec<_>, _>>()?;
        labels.push(parse_label(&record[dims], line)?);
        points.push(Point::Real(x));
    }
    finish(points, labels)
}

/// Parses `label idx:val …` rows with 1-based indices. Missing indices are
/// zero. The dimension is `dims` when given, else the largest index seen.
pub fn parse_svmlight(text: &str, dims: Option<usize>) -> Result<LabeledDataset, IngestError> {
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut fields = body.split_whitespace();
        let label = fields.next().expect("non-empty line has a field");
        labels.push(parse_label(label, line)?);
        let mut entries = Vec::new();
        let mut last = 0;
        for field in fields {
            let malformed = |message: String| IngestError::Malformed { line, message };
            let (idx, val) = field
                .split_once(':')
                .ok_or_else(|| malformed(format!("expected idx:value, got {field:?}")))?;
            let idx: usize = idx.parse().map_err(|_| malformed(format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(malformed("indices are 1-based".into()));
            }
            if idx <= last {
                return Err(malformed(format!("index {idx} is not increasing")));
            }
            if dims.is_some_and(|d| idx > d) {
                return Err(malformed(format!(
                    "index {idx} exceeds dimension {}",
                    dims.unwrap_or(0)
                )));
            }
            last = idx;
            entries.push((idx - 1, parse_value(val, line)?));
        }
        max_index = max_index.max(last);
        sparse.push(entries);
    }
    let dims = dims.unwrap_or(max_index);
    let points = sparse
        .into_iter()
        .map(|entries| {
            let mut x = vec![0.0; dims];
            for (j, v) in entries {
                x[j] = v;
            }
            Point::Real(x)
        })
        .collect();
    finish(points, labels)
}

fn finish(points: Vec<Point>, labels: Vec<f64>) -> Result<LabeledDataset, IngestError> {
    if points.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(LabeledDataset::new(points, labels).expect("labels are ±1 and lengths match"))
}
