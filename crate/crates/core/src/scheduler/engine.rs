use std::collections::VecDeque;

use super::{Command, CommandKind, CommandTrace, DramGeometry, Request, SchedulerError, TimingParams};

/// Earliest cycles at which each class of command may next go to a bank.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct BankBounds {
    open: bool,
    activate: u64,
    column: u64,
    rowclone: u64,
    lisa: u64,
    precharge: u64,
}

#[derive(Debug, Clone, Default)]
struct RankState {
    /// Cycle at which each of the last four activations stops counting
    /// toward the four-activate window.
    faw: VecDeque<u64>,
    rrd: u64,
}

#[derive(Debug, Clone, Default)]
struct ChannelState {
    bus: u64,
    column: u64,
    clflush: u64,
}

#[derive(Debug, Clone)]
struct Queue {
    requests: VecDeque<Request>,
    step: usize,
}

/// Greedy earliest-issue scheduler with per-bank in-order queues. Among
/// bank heads that can issue earliest, the one first in round-robin order
/// after the last issuing bank wins.
#[derive(Debug, Clone)]
pub struct Engine {
    geometry: DramGeometry,
    timings: TimingParams,
    banks: Vec<BankBounds>,
    ranks: Vec<RankState>,
    channels: Vec<ChannelState>,
    queues: Vec<Queue>,
    rr: usize,
    now: u64,
    completion: u64,
    issued: u64,
}

fn check_recipe(req: &Request) -> Result<(), SchedulerError> {
    if req.recipe.is_empty() {
        return Err(SchedulerError::EmptyRecipe);
    }
    let mut open = false;
    for s in req.recipe.iter() {
        let ok = match s.kind {
            CommandKind::Act => !open,
            CommandKind::Codic(_) => !open,
            CommandKind::Pre => open,
            _ => open,
        };
        if !ok {
            return Err(SchedulerError::Timing(format!("recipe issues {} with the bank {}", s.kind, if open { "open" } else { "closed" })));
        }
        match s.kind {
            CommandKind::Act => open = true,
            CommandKind::Pre => open = false,
            _ => {}
        }
    }
    if open {
        return Err(SchedulerError::Timing("recipe leaves the bank open".into()));
    }
    Ok(())
}

impl Engine {
    pub fn new(geometry: DramGeometry, timings: TimingParams) -> Result<Self, SchedulerError> {
        geometry.validate()?;
        timings.validate()?;
        let nb = geometry.total_banks() as usize;
        Ok(Self {
            geometry,
            timings,
            banks: vec![BankBounds::default(); nb],
            ranks: vec![RankState::default(); geometry.total_ranks() as usize],
            channels: vec![ChannelState::default(); geometry.channels as usize],
            queues: vec![Queue { requests: VecDeque::new(), step: 0 }; nb],
            rr: 0,
            now: 0,
            completion: 0,
            issued: 0,
        })
    }

    pub fn push(&mut self, req: Request) -> Result<(), SchedulerError> {
        let rows = self.geometry.rows_per_bank;
        if req.bank >= self.geometry.total_banks() || req.row >= rows || req.src_row >= rows {
            return Err(SchedulerError::OutOfRange { bank: req.bank, row: req.row });
        }
        check_recipe(&req)?;
        self.queues[req.bank as usize].requests.push_back(req);
        Ok(())
    }

    pub fn queued(&self, bank: u32) -> usize {
        self.queues[bank as usize].requests.len()
    }

    pub fn is_idle(&self) -> bool {
        self.queues.iter().all(|q| q.requests.is_empty())
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn completion(&self) -> u64 {
        self.completion
    }

    pub fn issued(&self) -> u64 {
        self.issued
    }

    pub fn geometry(&self) -> &DramGeometry {
        &self.geometry
    }

    pub fn timings(&self) -> &TimingParams {
        &self.timings
    }

    fn earliest(&self, bank: usize) -> Option<(u64, CommandKind)> {
        let q = &self.queues[bank];
        let req = q.requests.front()?;
        let kind = req.recipe[q.step].kind;
        let b = &self.banks[bank];
        let mut e = self.now.max(req.arrival);
        e = e.max(match kind {
            CommandKind::Act | CommandKind::Codic(_) => b.activate,
            CommandKind::Pre => b.precharge,
            CommandKind::Rd | CommandKind::Wr | CommandKind::ClflushWrite => b.column,
            CommandKind::RowcloneStep => b.rowclone,
            CommandKind::LisaStep => b.lisa,
        });
        if kind.is_activation() {
            let r = &self.ranks[self.geometry.rank_of(bank as u32) as usize];
            e = e.max(r.rrd);
            if r.faw.len() == 4 {
                e = e.max(r.faw[0]);
            }
        }
        let ch = &self.channels[self.geometry.channel_of(bank as u32) as usize];
        e = e.max(ch.bus);
        if kind.is_column() {
            e = e.max(ch.column);
        }
        if kind == CommandKind::ClflushWrite {
            e = e.max(ch.clflush);
        }
        Some((e, kind))
    }

    /// Issues the next command, or returns `None` when every queue is empty.
    pub fn step(&mut self) -> Option<Command> {
        let n = self.queues.len();
        let mut best: Option<(u64, usize, CommandKind)> = None;
        for i in 0..n {
            let bank = (self.rr + i) % n;
            if let Some((e, kind)) = self.earliest(bank) {
                if best.is_none_or(|(be, _, _)| e < be) {
                    best = Some((e, bank, kind));
                }
            }
        }
        let (t, bank, kind) = best?;
        let t_ = &self.timings;
        let q = &mut self.queues[bank];
        let req = q.requests.front().expect("head exists");
        let row = req.row_for(&req.recipe[q.step]);
        q.step += 1;
        if q.step == req.recipe.len() {
            q.requests.pop_front();
            q.step = 0;
        }

        let b = &mut self.banks[bank];
        match kind {
            CommandKind::Act => {
                b.open = true;
                b.activate = b.activate.max(t + t_.trc);
                b.column = b.column.max(t + t_.trcd);
                b.lisa = b.lisa.max(t + t_.trcd);
                b.rowclone = b.rowclone.max(t + t_.tras);
                b.precharge = b.precharge.max(t + t_.tras);
            }
            CommandKind::Codic(v) => b.activate = b.activate.max(t + t_.codic_rc(v)),
            CommandKind::Pre => {
                b.open = false;
                b.activate = b.activate.max(t + t_.trp);
            }
            CommandKind::Rd => b.precharge = b.precharge.max(t + t_.trtp),
            CommandKind::Wr | CommandKind::ClflushWrite => b.precharge = b.precharge.max(t + t_.write_recovery()),
            CommandKind::RowcloneStep => b.precharge = b.precharge.max(t + t_.tras),
            CommandKind::LisaStep => {
                b.lisa = b.lisa.max(t + t_.lisa_hop);
                b.precharge = b.precharge.max(t + t_.lisa_hop);
            }
        }
        if kind.is_activation() {
            let r = &mut self.ranks[self.geometry.rank_of(bank as u32) as usize];
            r.rrd = t + t_.trrd;
            if r.faw.len() == 4 {
                r.faw.pop_front();
            }
            r.faw.push_back(t + t_.tfaw);
        }
        let ch = &mut self.channels[self.geometry.channel_of(bank as u32) as usize];
        ch.bus = t + 1;
        if kind.is_column() {
            ch.column = t + t_.burst_cycles();
        }
        if kind == CommandKind::ClflushWrite {
            ch.clflush = t + t_.write_recovery();
        }

        self.now = t;
        self.completion = self.completion.max(t + kind.duration(t_));
        self.issued += 1;
        self.rr = (bank + 1) % n;
        Some(Command { kind, bank: bank as u32, row, issue_cycle: t })
    }

    /// Step index within the head request of `bank`.
    pub fn head_step(&self, bank: u32) -> usize {
        self.queues[bank as usize].step
    }

    /// Scheduler state with every time expressed relative to `now`. Bounds
    /// already in the past cannot constrain anything and collapse to zero,
    /// so two states with equal keys evolve identically up to a time shift.
    /// Request contents are not part of the key; callers compare states
    /// whose queued requests are interchangeable.
    pub fn state_key(&self) -> Vec<u64> {
        let rel = |x: u64| x.saturating_sub(self.now);
        let mut k = Vec::with_capacity(self.banks.len() * 9 + 16);
        k.push(self.rr as u64);
        k.push(rel(self.completion));
        for (b, q) in self.banks.iter().zip(&self.queues) {
            k.extend([b.open as u64, rel(b.activate), rel(b.column), rel(b.rowclone), rel(b.lisa), rel(b.precharge)]);
            k.push(q.requests.len() as u64);
            k.push(q.step as u64);
            k.push(q.requests.front().map_or(0, |r| rel(r.arrival)));
        }
        for r in &self.ranks {
            k.push(rel(r.rrd));
            k.push(r.faw.len() as u64);
            k.extend(r.faw.iter().map(|&x| rel(x)));
        }
        for c in &self.channels {
            k.extend([rel(c.bus), rel(c.column), rel(c.clflush)]);
        }
        k
    }
}

/// Schedules `requests` (queued per bank in the given order) to completion.
pub fn schedule(
    requests: impl IntoIterator<Item = Request>,
    geometry: DramGeometry,
    timings: TimingParams,
) -> Result<CommandTrace, SchedulerError> {
    let mut e = Engine::new(geometry, timings)?;
    for r in requests {
        e.push(r)?;
    }
    let mut trace = CommandTrace::new(geometry, timings);
    while let Some(c) = e.step() {
        trace.commands.push(c);
    }
    Ok(trace)
}
