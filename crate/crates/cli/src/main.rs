//! `codic`: command-line front end for the DRAM signal-timing simulator.

mod destruct;
mod nist;
mod output;
mod puf;
mod simulate;
mod variation;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use codic_core::config::ExperimentConfig;

use output::{read_text, Format, Invalid, OrInvalid, Report, Sink};

#[derive(Debug, Parser)]
#[command(name = "codic", version, about = "DRAM internal signal timing simulator")]
struct Cli {
    /// Device seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Per-read noise seed; overrides the config file.
    #[arg(long, global = true)]
    read_seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Play a signal schedule on one cell and emit the waveform.
    Simulate(simulate::Args),
    /// Sense-amplifier PUF experiments.
    #[command(subcommand)]
    Puf(puf::Cmd),
    /// Run the randomness test subset on a bit stream file.
    Nist(nist::Args),
    /// Data destruction experiments and mode register images.
    #[command(subcommand)]
    Destruct(destruct::Cmd),
    /// Process-variation experiments.
    #[command(subcommand)]
    Variation(variation::Cmd),
    /// Print the effective configuration.
    Config,
}

impl Cmd {
    fn default_name(&self) -> &'static str {
        match self {
            Cmd::Simulate(_) => "waveform",
            Cmd::Puf(_) => "puf",
            Cmd::Nist(_) => "nist",
            Cmd::Destruct(_) => "destruct",
            Cmd::Variation(_) => "variation",
            Cmd::Config => "config",
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(p) => ExperimentConfig::from_toml(&read_text(p)?).invalid()?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seeds.seed = s;
    }
    if let Some(s) = cli.read_seed {
        c.seeds.read_seed = s;
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let path = cli.out.clone().or_else(|| {
        cfg.output.dir.as_ref().map(|d| {
            let ext = match cli.format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            d.join(format!("{}.{ext}", cli.cmd.default_name()))
        })
    });
    let sink = Sink { path, format: cli.format };
    let report = match cli.cmd {
        Cmd::Simulate(a) => simulate::run(a, &cfg)?,
        Cmd::Puf(c) => puf::run(c, &cfg, &sink)?,
        Cmd::Nist(a) => nist::run(a, &cfg)?,
        Cmd::Destruct(c) => destruct::run(c, &cfg)?,
        Cmd::Variation(c) => variation::run(c, &cfg)?,
        Cmd::Config => match cli.format {
            Format::Csv => Report::Text(cfg.to_toml()),
            Format::Json => Report::Text(serde_json::to_string_pretty(&cfg)? + "\n"),
        },
    };
    sink.emit(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
