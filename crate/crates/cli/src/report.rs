//! Experiment reports: CSV rows followed by verdict lines.
//!
//! Files start with `# experiment <name>` and `# generated-at <unix seconds>`;
//! the second line is the only content that differs between identical runs.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::formats::real;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => f.write_str(&real(*v)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub check: String,
    /// The property the check tests.
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.check,
            self.invariant,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Report {
            experiment: experiment.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn verdict(&mut self, check: &str, invariant: &str, passed: bool, detail: String) {
        self.verdicts.push(Verdict {
            check: check.into(),
            invariant: invariant.into(),
            passed,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// Column values of `column` as reals, for rows matching `filter`.
    pub fn reals(&self, column: &str, filter: impl Fn(&[Cell]) -> bool) -> Vec<f64> {
        let j = self
            .columns
            .iter()
            .position(|c| c == column)
            .unwrap_or_else(|| panic!("no column {column}"));
        self.rows
            .iter()
            .filter(|r| filter(r))
            .filter_map(|r| match r[j] {
                Cell::Real(v) => Some(v),
                Cell::Int(v) => Some(v as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }

    pub fn to_csv(&self, generated_at: &str) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(|c| c.to_string()))
                .expect("in-memory write");
        }
        let body = String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 cells");
        let mut out = format!(
            "# experiment {}\n# generated-at {generated_at}\n{body}",
            self.experiment
        );
        for v in &self.verdicts {
            out.push_str(&format!("# verdict {v}\n"));
        }
        out
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut file = fs::File::create(path)?;
        file.write_all(self.to_csv(&timestamp()).as_bytes())
    }
}

pub fn timestamp() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    format!("unix:{secs}")
}

/// Drops `generated-at` lines, for determinism comparisons.
pub fn strip_generated_at(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# generated-at"))
        .map(|l| format!("{l}\n"))
        .collect()
}
