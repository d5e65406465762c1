use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{plan, recipe, DestructError, Mechanism, MechanismConfig};
use crate::scheduler::{schedule, CommandKind, CommandTrace, DramGeometry, EnergyParams, Engine, Request, TimingParams};

/// Requests kept queued per bank while streaming. The greedy policy only
/// looks at queue heads, so any depth of at least one yields the same trace.
const LOOKAHEAD: usize = 2;

/// Cap on remembered states while searching for a period.
const MAX_SNAPSHOTS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Issue every command.
    Full,
    /// Detect a repeating scheduler state and skip whole periods.
    Extrapolate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    /// Cycle at which the last command completes.
    pub cycles: u64,
    pub commands: u64,
    pub counts: BTreeMap<CommandKind, u64>,
    /// Periods skipped by extrapolation; zero for a full run.
    pub skipped_periods: u64,
}

struct Snapshot {
    now: u64,
    issued: u64,
    fed: Vec<u32>,
    counts: BTreeMap<CommandKind, u64>,
}

/// Destroys every row of `g` with `m`, streaming requests into the scheduler.
///
/// In extrapolate mode the scheduler state is fingerprinted each time bank 0
/// starts a row. Once a fingerprint repeats, the interval between the two
/// occurrences is a period of the schedule for as long as no bank runs out
/// of rows, so whole periods are skipped and the tail is simulated normally.
pub fn run_destruction(
    m: Mechanism,
    g: &DramGeometry,
    t: &TimingParams,
    cfg: &MechanismConfig,
    mode: RunMode,
) -> Result<RunSummary, DestructError> {
    cfg.validate()?;
    let mut eng = Engine::new(*g, *t)?;
    let r = recipe(m, g, cfg);
    let first = r[0].kind;
    let rows = g.rows_per_bank;
    let nb = g.total_banks() as usize;
    let mut fed = vec![0u32; nb];
    let mut counts: BTreeMap<CommandKind, u64> = BTreeMap::new();
    let mut offset = 0u64;
    let mut extra = 0u64;
    let mut skipped = 0u64;
    let mut seen: Option<HashMap<Vec<u64>, Snapshot>> = (mode == RunMode::Extrapolate).then(HashMap::new);

    let feed = |eng: &mut Engine, fed: &mut [u32]| -> Result<(), DestructError> {
        for (b, f) in fed.iter_mut().enumerate() {
            while eng.queued(b as u32) < LOOKAHEAD && *f < rows {
                let row = *f;
                eng.push(Request { bank: b as u32, row, src_row: cfg.source_row(row), recipe: r.clone(), arrival: 0 })?;
                *f += 1;
            }
        }
        Ok(())
    };
    feed(&mut eng, &mut fed)?;

    while let Some(c) = eng.step() {
        *counts.entry(c.kind).or_default() += 1;
        feed(&mut eng, &mut fed)?;
        let Some(map) = seen.as_mut() else { continue };
        if c.bank != 0 || c.kind != first || fed.iter().any(|&f| f >= rows) {
            continue;
        }
        let key = eng.state_key();
        if let Some(s) = map.get(&key) {
            let dt = eng.now() - s.now;
            let periods = fed
                .iter()
                .zip(&s.fed)
                .filter(|(a, b)| a > b)
                .map(|(&a, &b)| (rows - a) as u64 / (a - b) as u64)
                .min()
                .unwrap_or(0);
            if periods > 0 && dt > 0 {
                offset += periods * dt;
                extra += periods * (eng.issued() - s.issued);
                for (f, &f0) in fed.iter_mut().zip(&s.fed) {
                    *f += (periods * (*f - f0) as u64) as u32;
                }
                for (k, n) in counts.iter_mut() {
                    *n += periods * (*n - s.counts.get(k).copied().unwrap_or(0));
                }
                skipped = periods;
            }
            seen = None;
            continue;
        }
        if map.len() >= MAX_SNAPSHOTS {
            seen = None;
            continue;
        }
        map.insert(key, Snapshot { now: eng.now(), issued: eng.issued(), fed: fed.clone(), counts: counts.clone() });
    }

    Ok(RunSummary { cycles: eng.completion() + offset, commands: eng.issued() + extra, counts, skipped_periods: skipped })
}

/// Full command trace for destroying every row; memory grows with capacity.
pub fn destruction_trace(
    m: Mechanism,
    g: &DramGeometry,
    t: &TimingParams,
    cfg: &MechanismConfig,
) -> Result<CommandTrace, DestructError> {
    cfg.validate()?;
    Ok(schedule(plan(m, g, cfg), *g, *t)?)
}

/// Nanoseconds to destroy every row of `g`.
pub fn destruction_latency(
    m: Mechanism,
    g: &DramGeometry,
    t: &TimingParams,
    cfg: &MechanismConfig,
) -> Result<f64, DestructError> {
    let s = run_destruction(m, g, t, cfg, RunMode::Extrapolate)?;
    Ok(t.cycles_to_ns(s.cycles))
}

/// Nanojoules to destroy every row of `g`; independent of scheduling.
pub fn destruction_energy(
    m: Mechanism,
    g: &DramGeometry,
    e: &EnergyParams,
    cfg: &MechanismConfig,
) -> Result<f64, DestructError> {
    let mut per_row: BTreeMap<CommandKind, u64> = BTreeMap::new();
    for s in recipe(m, g, cfg).iter() {
        *per_row.entry(s.kind).or_default() += 1;
    }
    Ok(e.total(&per_row)? * g.total_rows() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DestructionReport {
    pub capacity_bytes: u64,
    pub mechanism: Mechanism,
    pub latency_cycles: u64,
    pub latency_ns: f64,
    pub energy_nj: f64,
    pub commands: u64,
}

pub fn sweep(
    capacities: &[u64],
    mechanisms: &[Mechanism],
    t: &TimingParams,
    e: &EnergyParams,
    cfg: &MechanismConfig,
) -> Result<Vec<DestructionReport>, DestructError> {
    let mut out = Vec::with_capacity(capacities.len() * mechanisms.len());
    for &cap in capacities {
        let g = DramGeometry::ddr3_module(cap);
        g.validate()?;
        for &m in mechanisms {
            let s = run_destruction(m, &g, t, cfg, RunMode::Extrapolate)?;
            out.push(DestructionReport {
                capacity_bytes: cap,
                mechanism: m,
                latency_cycles: s.cycles,
                latency_ns: t.cycles_to_ns(s.cycles),
                energy_nj: destruction_energy(m, &g, e, cfg)?,
                commands: s.commands,
            });
        }
    }
    Ok(out)
}

pub fn sweep_csv(rows: &[DestructionReport]) -> String {
    let mut s = String::from("capacity_bytes,mechanism,latency_ns,energy_nj\n");
    for r in rows {
        s.push_str(&format!("{},{},{:.3},{:.3}\n", r.capacity_bytes, r.mechanism, r.latency_ns, r.energy_nj));
    }
    s
}

fn parse_size(s: &str) -> Result<u64, DestructError> {
    let bad = || DestructError::Capacity(s.to_string());
    let u = s.trim().to_ascii_uppercase();
    let u = u.strip_suffix('B').unwrap_or(&u);
    let (num, shift) = match u.chars().last() {
        Some('K') => (&u[..u.len() - 1], 10),
        Some('M') => (&u[..u.len() - 1], 20),
        Some('G') => (&u[..u.len() - 1], 30),
        Some('T') => (&u[..u.len() - 1], 40),
        _ => (u, 0),
    };
    let n: u64 = num.trim().parse().map_err(|_| bad())?;
    n.checked_mul(1u64 << shift).filter(|&v| v > 0).ok_or_else(bad)
}

/// `64MB..64GB` (powers of two, inclusive), a comma list, or a single size.
pub fn parse_capacities(s: &str) -> Result<Vec<u64>, DestructError> {
    if let Some((a, b)) = s.split_once("..") {
        let (lo, hi) = (parse_size(a)?, parse_size(b)?);
        if !lo.is_power_of_two() || !hi.is_power_of_two() || lo > hi {
            return Err(DestructError::Capacity(s.to_string()));
        }
        let mut v = Vec::new();
        let mut c = lo;
        while c <= hi {
            v.push(c);
            match c.checked_mul(2) {
                Some(n) => c = n,
                None => break,
            }
        }
        return Ok(v);
    }
    s.split(',').map(parse_size).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_ranges() {
        let v = parse_capacities("64MB..64GB").unwrap();
        assert_eq!(v.len(), 11);
        assert_eq!(v[0], 64 << 20);
        assert_eq!(v[10], 64 << 30);
        assert_eq!(parse_capacities("1GB,2G").unwrap(), vec![1 << 30, 2 << 30]);
        assert!(parse_capacities("3MB..64MB").is_err());
        assert!(parse_capacities("lots").is_err());
        assert!(parse_capacities("0").is_err());
    }
}
