//! Trace validator. Written as a table of pairwise rules checked against
//! the most recent earlier command of the matching kind, plus a bank state
//! machine and the four-activate window; it shares no code with the
//! scheduler's bound bookkeeping.

use std::collections::VecDeque;
use std::fmt;

use super::{CommandKind, CommandTrace, TimingParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Position of the offending command in the trace.
    pub index: usize,
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {}: {}", self.index, self.rule, self.detail)
    }
}

#[derive(Clone, Copy)]
enum Scope {
    Bank,
    Rank,
    Channel,
}

type Pred = fn(CommandKind) -> bool;

struct PairRule {
    name: &'static str,
    scope: Scope,
    prev: Pred,
    cur: Pred,
    gap: fn(&TimingParams, CommandKind) -> u64,
}

fn opens(k: CommandKind) -> bool {
    matches!(k, CommandKind::Act | CommandKind::Codic(_))
}

const RULES: &[PairRule] = &[
    PairRule { name: "tRC", scope: Scope::Bank, prev: |k| k == CommandKind::Act, cur: opens, gap: |t, _| t.trc },
    PairRule {
        name: "tRC",
        scope: Scope::Bank,
        prev: |k| matches!(k, CommandKind::Codic(_)),
        cur: opens,
        gap: |t, k| match k {
            CommandKind::Codic(v) => t.codic_rc(v),
            _ => unreachable!(),
        },
    },
    PairRule {
        name: "tRAS",
        scope: Scope::Bank,
        prev: |k| k == CommandKind::Act,
        cur: |k| k == CommandKind::Pre,
        gap: |t, _| t.tras,
    },
    PairRule { name: "tRP", scope: Scope::Bank, prev: |k| k == CommandKind::Pre, cur: opens, gap: |t, _| t.trp },
    PairRule {
        name: "tRCD",
        scope: Scope::Bank,
        prev: |k| k == CommandKind::Act,
        cur: |k| k.is_column() || k == CommandKind::LisaStep,
        gap: |t, _| t.trcd,
    },
    PairRule {
        name: "RowClone",
        scope: Scope::Bank,
        prev: |k| k == CommandKind::Act,
        cur: |k| k == CommandKind::RowcloneStep,
        gap: |t, _| t.tras,
    },
    PairRule {
        name: "RowClone",
        scope: Scope::Bank,
        prev: |k| k == CommandKind::RowcloneStep,
        cur: |k| k == CommandKind::Pre,
        gap: |t, _| t.tras,
    },
    PairRule {
        name: "tWR",
        scope: Scope::Bank,
        prev: |k| k.is_write(),
        cur: |k| k == CommandKind::Pre,
        gap: |t, _| t.cwl + t.burst_len / 2 + t.twr,
    },
    PairRule {
        name: "tRTP",
        scope: Scope::Bank,
        prev: |k| k == CommandKind::Rd,
        cur: |k| k == CommandKind::Pre,
        gap: |t, _| t.trtp,
    },
    PairRule {
        name: "LISA",
        scope: Scope::Bank,
        prev: |k| k == CommandKind::LisaStep,
        cur: |k| k == CommandKind::LisaStep || k == CommandKind::Pre,
        gap: |t, _| t.lisa_hop,
    },
    PairRule {
        name: "tRRD",
        scope: Scope::Rank,
        prev: CommandKind::is_activation,
        cur: CommandKind::is_activation,
        gap: |t, _| t.trrd,
    },
    PairRule { name: "command bus", scope: Scope::Channel, prev: |_| true, cur: |_| true, gap: |_, _| 1 },
    PairRule {
        name: "tCCD",
        scope: Scope::Channel,
        prev: CommandKind::is_column,
        cur: CommandKind::is_column,
        gap: |t, _| t.burst_len / 2,
    },
    PairRule {
        name: "CLFLUSH",
        scope: Scope::Channel,
        prev: |k| k == CommandKind::ClflushWrite,
        cur: |k| k == CommandKind::ClflushWrite,
        gap: |t, _| t.cwl + t.burst_len / 2 + t.twr,
    },
];

/// Every violated constraint in `trace`; empty iff the trace is legal.
pub fn check_trace(trace: &CommandTrace, timings: &TimingParams) -> Vec<Violation> {
    let g = &trace.geometry;
    let banks = g.total_banks() as usize;
    let ranks = (g.channels * g.ranks) as usize;
    let channels = g.channels as usize;
    let width = |s: Scope| match s {
        Scope::Bank => banks,
        Scope::Rank => ranks,
        Scope::Channel => channels,
    };
    let mut last: Vec<Vec<Option<(u64, CommandKind)>>> = RULES.iter().map(|r| vec![None; width(r.scope)]).collect();
    let mut open = vec![false; banks];
    let mut window: Vec<VecDeque<u64>> = vec![VecDeque::new(); ranks];
    let mut prev_cycle = 0u64;
    let mut out = Vec::new();

    for (i, c) in trace.commands.iter().enumerate() {
        let mut flag = |rule: &'static str, detail: String| out.push(Violation { index: i, rule, detail });
        if c.bank as usize >= banks || c.row >= g.rows_per_bank {
            flag("range", format!("bank {} row {} outside geometry", c.bank, c.row));
            continue;
        }
        if c.issue_cycle < prev_cycle {
            flag("order", format!("cycle {} after {}", c.issue_cycle, prev_cycle));
        }
        prev_cycle = prev_cycle.max(c.issue_cycle);

        let bank = c.bank as usize;
        let rank = (c.bank / g.banks_per_rank) as usize;
        let channel = (c.bank / (g.banks_per_rank * g.ranks)) as usize;
        let slot = |s: Scope| match s {
            Scope::Bank => bank,
            Scope::Rank => rank,
            Scope::Channel => channel,
        };

        let needs_open = !opens(c.kind);
        if needs_open != open[bank] {
            flag("bank state", format!("{} to a {} bank", c.kind, if open[bank] { "open" } else { "closed" }));
        }
        match c.kind {
            CommandKind::Act => open[bank] = true,
            CommandKind::Pre => open[bank] = false,
            _ => {}
        }

        for (r, rule) in RULES.iter().enumerate() {
            if !(rule.cur)(c.kind) {
                continue;
            }
            if let Some((t0, k0)) = last[r][slot(rule.scope)] {
                let gap = (rule.gap)(timings, k0);
                if c.issue_cycle < t0 + gap {
                    flag(rule.name, format!("{} at {} is {} cycles after {} at {}, needs {}", c.kind, c.issue_cycle, c.issue_cycle.saturating_sub(t0), k0, t0, gap));
                }
            }
        }
        for (r, rule) in RULES.iter().enumerate() {
            if (rule.prev)(c.kind) {
                last[r][slot(rule.scope)] = Some((c.issue_cycle, c.kind));
            }
        }

        if c.kind.is_activation() {
            let w = &mut window[rank];
            if w.len() == 4 {
                let oldest = w.pop_front().expect("four entries");
                if c.issue_cycle < oldest + timings.tfaw {
                    flag("tFAW", format!("fifth activation at {} within {} cycles of {}", c.issue_cycle, timings.tfaw, oldest));
                }
            }
            w.push_back(c.issue_cycle);
        }
    }
    out
}
