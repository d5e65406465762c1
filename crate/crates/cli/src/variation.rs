use anyhow::Result;
use codic_core::config::ExperimentConfig;
use codic_core::circuit::CircuitParams;
use codic_core::variation::{esa_flip_rate_with, flip_rates_csv, PvSpec, RngSeed};

use crate::output::{OrInvalid, Report};

#[derive(Debug, clap::Subcommand)]
pub enum Cmd {
    /// Enforced-sense-amplification flip rate versus process variation.
    Esa {
        /// Comma list of process variation percentages.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5")]
        pv: Vec<f64>,
        /// Temperature in C; defaults to the config.
        #[arg(long)]
        temp: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
}

pub fn run(c: Cmd, cfg: &ExperimentConfig) -> Result<Report> {
    match c {
        Cmd::Esa { pv, temp, n } => {
            let t = temp.unwrap_or(cfg.pv.temperature_c);
            let p: CircuitParams = cfg.circuit;
            let rows = pv
                .iter()
                .map(|&x| {
                    let spec = PvSpec::new(x, t).invalid()?;
                    esa_flip_rate_with(&cfg.variation, &cfg.esa, &p, spec, n, RngSeed(cfg.seeds.seed)).invalid()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Report::Table(flip_rates_csv(&rows)))
        }
    }
}
