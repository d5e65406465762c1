//! Brute-force reference scheduler shared by the integration tests. It steps
//! one cycle at a time and checks each candidate command against every
//! earlier command with its own constraint table.

#![allow(dead_code)]

use std::collections::VecDeque;

use codic_core::scheduler::{Command, CommandKind, DramGeometry, Request, TimingParams};

fn opens(k: CommandKind) -> bool {
    matches!(k, CommandKind::Act | CommandKind::Codic(_))
}

fn activation(k: CommandKind) -> bool {
    matches!(k, CommandKind::Act | CommandKind::Codic(_) | CommandKind::RowcloneStep)
}

fn column(k: CommandKind) -> bool {
    matches!(k, CommandKind::Rd | CommandKind::Wr | CommandKind::ClflushWrite)
}

fn write(k: CommandKind) -> bool {
    matches!(k, CommandKind::Wr | CommandKind::ClflushWrite)
}

fn write_recovery(t: &TimingParams) -> u64 {
    t.cwl + t.burst_len / 2 + t.twr
}

fn codic_cycle(t: &TimingParams, k: CommandKind) -> u64 {
    match k {
        CommandKind::Codic(v) => {
            // Smallest whole number of clocks covering the latency.
            let mut k = 0u64;
            while (k as f64) * t.tck_ns < t.codic_ns.get(v) - 1e-9 {
                k += 1;
            }
            k + t.trp
        }
        _ => unreachable!(),
    }
}

/// Cycles from issue until the command has finished.
pub fn busy(t: &TimingParams, k: CommandKind) -> u64 {
    match k {
        CommandKind::Act => t.trcd,
        CommandKind::Pre => t.trp,
        CommandKind::Rd => t.cl + t.burst_len / 2,
        CommandKind::Wr | CommandKind::ClflushWrite => write_recovery(t),
        CommandKind::Codic(_) => codic_cycle(t, k),
        CommandKind::RowcloneStep => t.tras,
        CommandKind::LisaStep => t.lisa_hop,
    }
}

/// Minimum distance from `a` to a later `b` on the same bank.
fn bank_gap(t: &TimingParams, a: CommandKind, b: CommandKind) -> u64 {
    use CommandKind::*;
    match (a, b) {
        (Act, x) if opens(x) => t.trc,
        (Codic(_), x) if opens(x) => codic_cycle(t, a),
        (Pre, x) if opens(x) => t.trp,
        (Act, Pre) | (Act, RowcloneStep) | (RowcloneStep, Pre) => t.tras,
        (Act, x) if column(x) || x == LisaStep => t.trcd,
        (x, Pre) if write(x) => write_recovery(t),
        (Rd, Pre) => t.trtp,
        (LisaStep, LisaStep) | (LisaStep, Pre) => t.lisa_hop,
        _ => 0,
    }
}

fn max_gap(t: &TimingParams) -> u64 {
    let codic = codic_core::signals::VariantName::ALL.into_iter().map(|v| codic_cycle(t, CommandKind::Codic(v))).max().unwrap();
    [t.trc, t.tras, t.trp, t.trcd, t.trtp, t.lisa_hop, t.trrd, t.tfaw, write_recovery(t), t.burst_len, codic, 1]
        .into_iter()
        .max()
        .unwrap()
}

pub struct Reference<'a> {
    g: &'a DramGeometry,
    t: &'a TimingParams,
    horizon: u64,
    pub history: Vec<Command>,
}

impl<'a> Reference<'a> {
    pub fn new(g: &'a DramGeometry, t: &'a TimingParams) -> Self {
        Self { g, t, horizon: max_gap(t), history: Vec::new() }
    }

    /// Whether `kind` may issue to `bank` at cycle `c` after the history.
    pub fn legal(&self, c: u64, kind: CommandKind, bank: u32) -> bool {
        let (g, t) = (self.g, self.t);
        if self.history.last().is_some_and(|p| p.issue_cycle > c) {
            return false;
        }
        let rank = bank / g.banks_per_rank;
        let channel = bank / (g.banks_per_rank * g.ranks);
        let mut rank_acts = 0;
        for p in self.history.iter().rev() {
            if p.issue_cycle + self.horizon <= c {
                break;
            }
            let same_channel = p.bank / (g.banks_per_rank * g.ranks) == channel;
            let same_rank = p.bank / g.banks_per_rank == rank;
            let mut gap = 0;
            if p.bank == bank {
                gap = gap.max(bank_gap(t, p.kind, kind));
            }
            if same_rank && activation(p.kind) && activation(kind) {
                gap = gap.max(t.trrd);
                rank_acts += 1;
                if rank_acts == 4 {
                    gap = gap.max(t.tfaw);
                }
            }
            if same_channel {
                gap = gap.max(1);
            }
            if same_channel && column(p.kind) && column(kind) {
                gap = gap.max(t.burst_len / 2);
            }
            if same_channel && p.kind == CommandKind::ClflushWrite && kind == CommandKind::ClflushWrite {
                gap = gap.max(write_recovery(t));
            }
            if c < p.issue_cycle + gap {
                return false;
            }
        }
        true
    }
}

/// Tries every cycle in turn; at each one the first bank in round-robin
/// order after the last issuing bank whose head command is legal issues.
/// Returns the commands and the completion cycle.
pub fn brute_force(requests: &[Request], g: &DramGeometry, t: &TimingParams) -> (Vec<Command>, u64) {
    let n = g.total_banks() as usize;
    let mut queues: Vec<VecDeque<(Request, usize)>> = vec![VecDeque::new(); n];
    for r in requests {
        queues[r.bank as usize].push_back((r.clone(), 0));
    }
    let mut oracle = Reference::new(g, t);
    let mut left: usize = requests.iter().map(|r| r.recipe.len()).sum();
    let (mut c, mut rr, mut done) = (0u64, 0usize, 0u64);
    while left > 0 {
        let mut issued = false;
        for i in 0..n {
            let bank = (rr + i) % n;
            let Some((req, step)) = queues[bank].front() else { continue };
            let s = req.recipe[*step];
            if req.arrival > c || !oracle.legal(c, s.kind, bank as u32) {
                continue;
            }
            let row = req.row_for(&s);
            oracle.history.push(Command { kind: s.kind, bank: bank as u32, row, issue_cycle: c });
            done = done.max(c + busy(t, s.kind));
            let q = &mut queues[bank];
            q.front_mut().unwrap().1 += 1;
            if q.front().unwrap().1 == q.front().unwrap().0.recipe.len() {
                q.pop_front();
            }
            rr = (bank + 1) % n;
            left -= 1;
            issued = true;
            break;
        }
        if !issued {
            c += 1;
        }
    }
    (oracle.history, done)
}
