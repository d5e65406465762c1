use std::path::PathBuf;

use anyhow::{bail, Result};
use codic_core::config::ExperimentConfig;
use codic_core::destruct::{
    atomic_gate, destruction_trace, parse_capacities, replay_dealloc, run_destruction, sweep, sweep_csv,
    CommandSource, DeallocTrace, DestructionSession, GateStatus, Mechanism, RunMode,
};
use codic_core::scheduler::{check_trace, CommandKind, DramGeometry};
use codic_core::signals::{decode_mrs, encode_mrs, parse_schedule, schedule_to_toml, ModeRegisterImage, VariantName};

use crate::output::{invalid, read_text, OrInvalid, Report};

fn mechanisms(s: &str) -> Result<Vec<Mechanism>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Mechanism::ALL.to_vec());
    }
    s.split(',').map(|m| m.trim().parse::<Mechanism>().invalid()).collect()
}

fn capacity(s: &str) -> Result<u64> {
    match parse_capacities(s).invalid()?.as_slice() {
        [c] => Ok(*c),
        _ => Err(invalid(format!("`{s}` is not a single capacity"))),
    }
}

fn geometry(s: &str) -> Result<DramGeometry> {
    let g = DramGeometry::ddr3_module(capacity(s)?);
    g.validate().invalid()?;
    Ok(g)
}

#[derive(Debug, clap::Subcommand)]
pub enum Cmd {
    /// Destruction latency and energy across module capacities.
    Sweep {
        /// `64MB..64GB` (powers of two), a comma list, or one size.
        #[arg(long, default_value = "64MB..64GB")]
        capacities: String,
        /// `all` or a comma list of codic, rowclone, lisa, tcg_write.
        #[arg(long, default_value = "all")]
        mech: String,
    },
    /// Full command trace of one destruction, checked against the timing rules.
    Trace {
        #[arg(long, default_value = "64MB")]
        capacity: String,
        #[arg(long, default_value = "codic")]
        mech: Mechanism,
    },
    /// Replay a secure-deallocation trace.
    Replay {
        trace: PathBuf,
        #[arg(long, default_value = "all")]
        mech: String,
        /// Module capacity; defaults to the config geometry.
        #[arg(long)]
        capacity: Option<String>,
    },
    /// Mode register image of a schedule, or the schedule of an image.
    Mrs {
        #[arg(long, conflicts_with_all = ["schedule", "decode"])]
        variant: Option<VariantName>,
        #[arg(long, conflicts_with = "decode")]
        schedule: Option<PathBuf>,
        /// `0x...` image, optionally followed by `/mask`.
        #[arg(long)]
        decode: Option<String>,
    },
    /// Submit a command while a destruction is in flight.
    Gate {
        #[arg(long, default_value = "8GB")]
        capacity: String,
        #[arg(long, default_value = "codic")]
        mech: Mechanism,
        /// Fraction of the destruction elapsed at submission; above 1 is after completion.
        #[arg(long, default_value_t = 0.5)]
        progress: f64,
        #[arg(long, default_value = "RD")]
        kind: CommandKind,
        #[arg(long)]
        internal: bool,
    },
}

pub fn run(c: Cmd, cfg: &ExperimentConfig) -> Result<Report> {
    let t = &cfg.timings;
    let m_cfg = &cfg.mechanism;
    Ok(match c {
        Cmd::Sweep { capacities, mech } => {
            let caps = parse_capacities(&capacities).invalid()?;
            let rows = sweep(&caps, &mechanisms(&mech)?, t, &cfg.energy, m_cfg).invalid()?;
            Report::Table(sweep_csv(&rows))
        }
        Cmd::Trace { capacity, mech } => {
            let g = geometry(&capacity)?;
            let trace = destruction_trace(mech, &g, t, m_cfg).invalid()?;
            let v = check_trace(&trace, t);
            eprintln!("{} commands, completion {} cycles, {} violations", trace.commands.len(), trace.completion_cycle(), v.len());
            if let Some(first) = v.first() {
                bail!("trace violates timing: {first}");
            }
            Report::Table(trace.to_csv())
        }
        Cmd::Replay { trace, mech, capacity } => {
            let g = match capacity {
                Some(c) => geometry(&c)?,
                None => cfg.geometry,
            };
            let tr = DeallocTrace::parse(&read_text(&trace)?).invalid()?;
            let mut csv = String::from("mechanism,cycles,energy_nj\n");
            for m in mechanisms(&mech)? {
                let r = replay_dealloc(&tr, m, &g, t, &cfg.energy, m_cfg).invalid()?;
                csv.push_str(&format!("{m},{},{:.3}\n", r.cycles, r.energy_nj));
            }
            Report::Table(csv)
        }
        Cmd::Mrs { variant, schedule, decode } => {
            if let Some(text) = decode {
                let img = ModeRegisterImage::parse(&text).invalid()?;
                let s = decode_mrs(&img).invalid()?;
                return Ok(Report::Text(schedule_to_toml(&s)));
            }
            let (name, s) = match schedule {
                Some(p) => (p.display().to_string(), parse_schedule(&read_text(&p)?).invalid()?),
                None => {
                    let v = variant.unwrap_or(VariantName::Sig);
                    (v.to_string(), v.schedule())
                }
            };
            let img = encode_mrs(&s).invalid()?;
            if decode_mrs(&img)? != s {
                bail!("mode register image does not decode back to the schedule");
            }
            Report::Table(format!("name,image,mask\n{name},{},{:04b}\n", img.to_hex(), img.mask()))
        }
        Cmd::Gate { capacity, mech, progress, kind, internal } => {
            if !(progress.is_finite() && progress >= 0.0) {
                return Err(invalid("--progress must be a non-negative number"));
            }
            let g = geometry(&capacity)?;
            let s = run_destruction(mech, &g, t, m_cfg, RunMode::Extrapolate).invalid()?;
            let session = DestructionSession::new(0, s.cycles);
            let cycle = if progress < 1.0 { session.cycle_at(progress) } else { (s.cycles as f64 * progress).ceil() as u64 };
            let source = if internal { CommandSource::Internal } else { CommandSource::External };
            let status = match atomic_gate(&session, cycle, kind, source) {
                GateStatus::Accepted => "ACCEPTED",
                GateStatus::Rejected => "REJECTED",
            };
            Report::Table(format!(
                "cycle,end_cycle,kind,source,status\n{cycle},{},{kind},{},{status}\n",
                session.end_cycle,
                if internal { "internal" } else { "external" }
            ))
        }
    })
}
