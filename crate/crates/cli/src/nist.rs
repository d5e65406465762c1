use std::path::PathBuf;

use anyhow::{Context, Result};
use codic_core::config::ExperimentConfig;
use codic_core::randomness::{run_suite_with, suite_csv, BitStream};

use crate::output::{invalid, OrInvalid, Report};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Bit stream: packed bytes (MSB first) or '0'/'1' text.
    file: PathBuf,
    /// Treat the file as '0'/'1' text.
    #[arg(long, conflicts_with = "binary")]
    ascii: bool,
    /// Treat the file as packed bytes even if it looks like text.
    #[arg(long)]
    binary: bool,
    /// Use only the first N bits.
    #[arg(long)]
    bits: Option<usize>,
}

fn looks_ascii(b: &[u8]) -> bool {
    b.iter().any(|c| matches!(c, b'0' | b'1')) && b.iter().all(|c| matches!(c, b'0' | b'1' | b'\n' | b'\r' | b' ' | b'\t'))
}

pub fn run(a: Args, cfg: &ExperimentConfig) -> Result<Report> {
    let bytes = std::fs::read(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let mut s = if a.ascii || (!a.binary && looks_ascii(&bytes)) {
        let text = String::from_utf8(bytes).map_err(|_| invalid("stream is not text"))?;
        BitStream::from_ascii(&text).invalid()?
    } else {
        BitStream::from_bytes(&bytes)
    };
    if let Some(n) = a.bits {
        if n > s.len() {
            return Err(invalid(format!("--bits {n} exceeds the {} bits in the file", s.len())));
        }
        s.truncate(n);
    }
    Ok(Report::Table(suite_csv(&run_suite_with(&s, &cfg.nist))))
}
