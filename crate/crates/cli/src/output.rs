use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Marks an error as caused by bad user input (exit code 2).
#[derive(Debug)]
pub struct Invalid(pub anyhow::Error);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Invalid {}

pub trait OrInvalid<T> {
    fn invalid(self) -> Result<T>;
}

impl<T, E: Into<anyhow::Error>> OrInvalid<T> for std::result::Result<T, E> {
    fn invalid(self) -> Result<T> {
        self.map_err(|e| Invalid(e.into()).into())
    }
}

pub fn invalid(msg: impl fmt::Display) -> anyhow::Error {
    Invalid(anyhow::anyhow!("{msg}")).into()
}

pub enum Report {
    /// CSV with a header row; converted to an array of records for JSON.
    Table(String),
    /// Written verbatim in either format.
    Text(String),
    Bytes(Vec<u8>),
}

fn cell(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        return Value::Number(i.into());
    }
    match s.parse::<f64>().ok().and_then(Number::from_f64) {
        Some(n) => Value::Number(n),
        None => Value::String(s.to_string()),
    }
}

/// Our CSV never quotes, so a plain split is exact.
pub fn csv_to_json(csv: &str) -> Value {
    let mut lines = csv.lines().filter(|l| !l.is_empty());
    let header: Vec<&str> = lines.next().map(|h| h.split(',').collect()).unwrap_or_default();
    let rows = lines
        .map(|l| {
            let mut m = Map::new();
            for (k, v) in header.iter().zip(l.split(',')) {
                m.insert((*k).to_string(), cell(v));
            }
            Value::Object(m)
        })
        .collect();
    Value::Array(rows)
}

pub struct Sink {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Sink {
    pub fn emit(&self, r: Report) -> Result<()> {
        let bytes = match r {
            Report::Table(csv) => match self.format {
                Format::Csv => csv.into_bytes(),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&csv_to_json(&csv))?;
                    s.push('\n');
                    s.into_bytes()
                }
            },
            Report::Text(t) => t.into_bytes(),
            Report::Bytes(b) => b,
        };
        match &self.path {
            Some(p) => write_file(p, &bytes),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(&bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn write_file(p: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))
}

pub fn read_text(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_to_records() {
        let v = csv_to_json("a,b,c\n1,2.5,x\n");
        assert_eq!(v, serde_json::json!([{"a": 1, "b": 2.5, "c": "x"}]));
        assert_eq!(csv_to_json("a\n"), serde_json::json!([]));
    }
}
