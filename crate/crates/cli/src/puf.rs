use std::path::PathBuf;

use anyhow::Result;
use codic_core::config::ExperimentConfig;
use codic_core::puf::{
    authenticate, build_subarray, far_frr_experiment, histogram, histogram_csv, intra_inter_distributions, jaccard,
    median, respond, AuthDecision, Challenge, FilterPolicy, PufMechanism, PufResponse, SubarrayModel, SEGMENT_BYTES,
};
use codic_core::randomness::{codic_sig_stream, StreamSource};
use codic_core::variation::{PvSpec, RngSeed};

use crate::output::{read_text, OrInvalid, Report, Sink};

#[derive(Debug, Clone, clap::Args)]
pub struct Device {
    /// Cells in the simulated subarray (a multiple of 65536).
    #[arg(long, default_value_t = 1 << 26)]
    cells: u64,
    /// Process variation in percent; defaults to the config.
    #[arg(long)]
    pv: Option<f64>,
    /// Temperature in C; defaults to the config.
    #[arg(long)]
    temp: Option<f64>,
}

impl Device {
    fn build(&self, cfg: &ExperimentConfig) -> Result<SubarrayModel> {
        let spec = PvSpec::new(self.pv.unwrap_or(cfg.pv.pv_percent), self.temp.unwrap_or(cfg.pv.temperature_c)).invalid()?;
        build_subarray(RngSeed(cfg.seeds.seed), self.cells, spec, &cfg.puf).invalid()
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct Filter {
    /// Reads per evaluation; defaults to the config.
    #[arg(long)]
    reads: Option<u32>,
    /// Reads that must flip for a cell to count; defaults to `--reads`.
    #[arg(long)]
    threshold: Option<u32>,
}

impl Filter {
    fn policy(&self, cfg: &ExperimentConfig) -> Result<FilterPolicy> {
        match self.reads {
            Some(n) => FilterPolicy::new(n, self.threshold.unwrap_or(n)).invalid(),
            None => FilterPolicy::new(cfg.filter.n_reads, self.threshold.unwrap_or(cfg.filter.threshold)).invalid(),
        }
    }
}

#[derive(Debug, clap::Subcommand)]
pub enum Cmd {
    /// Build a device and summarize its cell population.
    Build {
        #[command(flatten)]
        device: Device,
    },
    /// Evaluate one segment and write the response file.
    Respond {
        #[command(flatten)]
        device: Device,
        #[command(flatten)]
        filter: Filter,
        /// Segment index.
        #[arg(long, default_value_t = 0)]
        segment: u64,
        #[arg(long, default_value_t = SEGMENT_BYTES)]
        segment_size: u64,
    },
    /// Jaccard index of two response files.
    Jaccard { a: PathBuf, b: PathBuf },
    /// Exact-match authentication of a probe against an enrolled response.
    Auth { enrolled: PathBuf, probe: PathBuf },
    /// False acceptance and rejection rates over random pairs.
    FarFrr {
        #[command(flatten)]
        device: Device,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = SEGMENT_BYTES)]
        segment_size: u64,
    },
    /// Evaluation time of one segment in milliseconds.
    EvalTime {
        #[arg(long, default_value = "codic")]
        mech: PufMechanism,
        #[command(flatten)]
        filter: Filter,
        #[arg(long, default_value_t = SEGMENT_BYTES)]
        segment_size: u64,
    },
    /// Intra- and inter-Jaccard histograms over random segment pairs.
    Distributions {
        #[command(flatten)]
        device: Device,
        #[command(flatten)]
        filter: Filter,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = SEGMENT_BYTES)]
        segment_size: u64,
    },
    /// Whitened random bit stream; binary when written to a file.
    Stream {
        #[arg(long, default_value_t = 2_048_000)]
        bits: usize,
        /// Write '0'/'1' text instead of packed bytes.
        #[arg(long)]
        ascii: bool,
    },
}

fn round(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

pub fn run(c: Cmd, cfg: &ExperimentConfig, sink: &Sink) -> Result<Report> {
    Ok(match c {
        Cmd::Build { device } => {
            let sub = device.build(cfg)?;
            let flipped = sub.flipped_cells().count();
            Report::Table(format!(
                "cells,segments,offset_sigma_v,noise_sigma_v,flipped_cells,flipped_fraction\n{},{},{},{},{},{}\n",
                sub.n_cells(),
                sub.segments(SEGMENT_BYTES),
                sub.offset_sigma_v(),
                sub.noise_sigma_v(),
                flipped,
                sub.flipped_fraction()
            ))
        }
        Cmd::Respond { device, filter, segment, segment_size } => {
            let sub = device.build(cfg)?;
            let policy = filter.policy(cfg)?;
            let ch = Challenge::segment(segment, segment_size);
            let r = respond(&sub, &ch, &policy, RngSeed(cfg.seeds.read_seed)).invalid()?;
            let header = format!(
                "seed={} read_seed={} cells={} segment={} segment_size={} reads={} threshold={}",
                cfg.seeds.seed, cfg.seeds.read_seed, sub.n_cells(), segment, segment_size, policy.n_reads, policy.threshold
            );
            Report::Text(r.to_text(&header))
        }
        Cmd::Jaccard { a, b } => {
            let a = PufResponse::parse(&read_text(&a)?).invalid()?;
            let b = PufResponse::parse(&read_text(&b)?).invalid()?;
            Report::Table(format!("jaccard\n{:.6}\n", jaccard(&a, &b)))
        }
        Cmd::Auth { enrolled, probe } => {
            let e = PufResponse::parse(&read_text(&enrolled)?).invalid()?;
            let p = PufResponse::parse(&read_text(&probe)?).invalid()?;
            let d = match authenticate(&e, &p) {
                AuthDecision::Accept => "ACCEPT",
                AuthDecision::Reject => "REJECT",
            };
            Report::Table(format!("decision,jaccard\n{d},{:.6}\n", jaccard(&e, &p)))
        }
        Cmd::FarFrr { device, pairs, segment_size } => {
            let sub = device.build(cfg)?;
            let r = far_frr_experiment(&sub, pairs, segment_size, RngSeed(cfg.seeds.read_seed)).invalid()?;
            Report::Table(format!(
                "pairs,false_accepts,false_rejects,far,frr\n{},{},{},{},{}\n",
                pairs, r.false_accepts, r.false_rejects, r.far, r.frr
            ))
        }
        Cmd::EvalTime { mech, filter, segment_size } => {
            let policy = filter.policy(cfg)?;
            let ms = cfg.eval_time.eval_time(mech, &policy, segment_size);
            Report::Table(format!(
                "mechanism,reads,threshold,segment_bytes,eval_time_ms\n{mech},{},{},{segment_size},{}\n",
                policy.n_reads,
                policy.threshold,
                round(ms)
            ))
        }
        Cmd::Distributions { device, filter, pairs, bins, segment_size } => {
            let sub = device.build(cfg)?;
            let policy = filter.policy(cfg)?;
            let d = intra_inter_distributions(&sub, pairs, segment_size, &policy, RngSeed(cfg.seeds.read_seed)).invalid()?;
            eprintln!("intra median {:.6} inter median {:.6}", median(&d.intra), median(&d.inter));
            Report::Table(histogram_csv(&histogram(&d, bins)))
        }
        Cmd::Stream { bits, ascii } => {
            let mut src = StreamSource::new(RngSeed(cfg.seeds.seed));
            src.read_seed = RngSeed(cfg.seeds.read_seed);
            src.spec = cfg.pv;
            src.calib = cfg.puf;
            let s = codic_sig_stream(&src, bits).invalid()?;
            if s.len() < bits {
                anyhow::bail!("source produced only {} of {bits} bits", s.len());
            }
            if ascii || sink.path.is_none() {
                Report::Text(s.to_ascii() + "\n")
            } else {
                Report::Bytes(s.to_bytes())
            }
        }
    })
}
