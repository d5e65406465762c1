use std::path::PathBuf;

use anyhow::Result;
use codic_core::circuit::{self, CellState};
use codic_core::config::ExperimentConfig;
use codic_core::signals::{parse_schedule, VariantName};
use codic_core::variation::{PvSpec, RngSeed, VariationSample};

use crate::output::{invalid, read_text, OrInvalid, Report};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Built-in variant (sig, sig_opt, det_zero, det_one, esa, activate, precharge).
    #[arg(long, conflicts_with = "schedule")]
    variant: Option<VariantName>,
    /// TOML schedule file.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Initial cell voltage: 0, vdd, or a number of volts.
    #[arg(long, default_value = "0")]
    init_cell: String,
    /// Process variation in percent; 0 simulates the nominal circuit.
    #[arg(long, default_value_t = 0.0)]
    pv: f64,
    /// Temperature in C; defaults to the config.
    #[arg(long)]
    temp: Option<f64>,
}

fn init_voltage(s: &str, vdd: f64) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "0" | "gnd" => Ok(0.0),
        "vdd" => Ok(vdd),
        "half" => Ok(vdd / 2.0),
        other => other.parse::<f64>().map_err(|_| invalid(format!("--init-cell `{s}` is not 0, vdd or a voltage"))),
    }
}

pub fn run(a: Args, cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.circuit;
    let schedule = match &a.schedule {
        Some(path) => {
            let s = parse_schedule(&read_text(path)?).invalid()?;
            let report = s.validate();
            if !report.is_valid() {
                return Err(invalid(format!("invalid schedule\n{report}")));
            }
            s
        }
        None => a.variant.unwrap_or(VariantName::Sig).schedule(),
    };
    let v_cell = init_voltage(&a.init_cell, p.vdd)?;
    let v = if a.pv > 0.0 {
        let spec = PvSpec::new(a.pv, a.temp.unwrap_or(cfg.pv.temperature_c)).invalid()?;
        let mut s = cfg.variation.sample(&spec, RngSeed(cfg.seeds.seed), 1);
        cfg.variation.realize_read_noise(&mut s, RngSeed(cfg.seeds.read_seed));
        s[0]
    } else {
        VariationSample::nominal()
    };
    let (wave, last) = circuit::run(&schedule, CellState::precharged(v_cell, &p), &p, &v).invalid()?;
    eprintln!(
        "final v_cell={:.6} v_bl={:.6} read={:?}",
        last.v_cell,
        last.v_bl,
        circuit::read_value(&last, &p)
    );
    Ok(Report::Table(wave.to_csv()))
}
