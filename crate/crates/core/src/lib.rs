//! Behavioral simulator for fine-grained control of internal DRAM signal
//! timings and the mechanisms built on it: a sense-amplifier-offset PUF,
//! a random-bit source, and in-DRAM bulk data destruction.

pub mod circuit;
pub mod rng;
pub mod signals;
pub mod variation;
pub mod puf;
pub mod randomness;
pub mod scheduler;
pub mod destruct;
pub mod config;
