//! Von Neumann whitening, a seven-test subset of the NIST SP 800-22
//! statistical suite, and the CODIC-sig bit source.

mod bitstream;
pub mod nist;
mod source;

pub use bitstream::{von_neumann, BitStream};
pub use nist::{run_suite, run_suite_with, suite_csv, SuiteParams, TestReport, Verdict};
pub use source::{codic_sig_stream, sparse_von_neumann, StreamSource};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RandomnessError {
    #[error("invalid character {0:?} in bit text")]
    BadChar(char),
    #[error("{test} needs at least {min} bits, got {got}")]
    TooShort { test: &'static str, min: usize, got: usize },
    #[error("{test}: parameter {name} = {value} is out of range")]
    Param { test: &'static str, name: &'static str, value: usize },
    #[error(transparent)]
    Puf(#[from] crate::puf::PufError),
}
