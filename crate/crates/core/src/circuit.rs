//! Behavioral model of one cell, its bitline pair and the sense amplifier,
//! integrated with fixed-step RK4 while a signal schedule plays out.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signals::{SignalId, SignalSchedule};
use crate::variation::VariationSample;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("circuit parameter `{0}` must be positive and finite")]
    NonPositive(&'static str),
    #[error("dt of {dt_ns} ns exceeds a tenth of the {step_ns} ns schedule step")]
    StepTooCoarse { dt_ns: f64, step_ns: u32 },
    #[error("metastable band must lie in [0, vdd/2)")]
    Band,
    #[error("cell voltage {0} V outside [0, vdd]")]
    InitialVoltage(f64),
    #[error("schedule is invalid: {0}")]
    Schedule(crate::signals::ValidationReport),
}

/// Electrical constants. Capacitances in farads, time constants in seconds,
/// the sense-amplifier gain in 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitParams {
    pub vdd: f64,
    pub c_cell: f64,
    pub c_bl: f64,
    pub tau_wl: f64,
    pub tau_eq: f64,
    pub sa_gain: f64,
    pub tau_half: f64,
    /// Distance from vdd/2 within which the bitline reads as metastable.
    pub metastable_band: f64,
    pub dt_ns: f64,
    /// Deliberate sense-amplifier imbalance in volts; positive favors 1.
    pub sa_imbalance_v: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            vdd: 1.5,
            c_cell: 24e-15,
            c_bl: 144e-15,
            tau_wl: 0.6e-9,
            tau_eq: 0.3e-9,
            sa_gain: 2.0e9,
            tau_half: 1.0e-9,
            metastable_band: 0.075,
            dt_ns: 0.05,
            sa_imbalance_v: 0.0,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self, step_ns: u32) -> Result<(), CircuitError> {
        let checks = [
            ("vdd", self.vdd),
            ("c_cell", self.c_cell),
            ("c_bl", self.c_bl),
            ("tau_wl", self.tau_wl),
            ("tau_eq", self.tau_eq),
            ("sa_gain", self.sa_gain),
            ("tau_half", self.tau_half),
            ("dt_ns", self.dt_ns),
        ];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(CircuitError::NonPositive(name));
            }
        }
        if self.dt_ns > step_ns as f64 / 10.0 + 1e-12 {
            return Err(CircuitError::StepTooCoarse { dt_ns: self.dt_ns, step_ns });
        }
        if !(self.metastable_band >= 0.0 && self.metastable_band < self.vdd / 2.0) {
            return Err(CircuitError::Band);
        }
        if !self.sa_imbalance_v.is_finite() {
            return Err(CircuitError::NonPositive("sa_imbalance_v"));
        }
        Ok(())
    }

    pub fn half(&self) -> f64 {
        self.vdd / 2.0
    }

    /// Largest total sense-amplifier offset for which the deterministic
    /// variants are guaranteed to produce their value. Set to a tenth of
    /// vdd: about six sigma at 4% variation, well inside the failure point.
    pub fn det_offset_bound(&self) -> f64 {
        0.1 * self.vdd
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub v_cell: f64,
    pub v_bl: f64,
    pub v_blb: f64,
}

impl CellState {
    /// Cell at `v_cell` with both bitlines precharged to vdd/2.
    pub fn precharged(v_cell: f64, p: &CircuitParams) -> Self {
        Self { v_cell, v_bl: p.half(), v_blb: p.half() }
    }

    /// Total charge on the cell and the true bitline.
    pub fn charge(&self, p: &CircuitParams) -> f64 {
        p.c_cell * self.v_cell + p.c_bl * self.v_bl
    }
}

/// Which signals are asserted (logically, independent of polarity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct SignalLevels {
    pub wl: bool,
    pub eq: bool,
    pub sense_p: bool,
    pub sense_n: bool,
}

impl SignalLevels {
    pub fn at(schedule: &SignalSchedule, t_ns: f64) -> Self {
        Self {
            wl: schedule.is_asserted(SignalId::Wl, t_ns),
            eq: schedule.is_asserted(SignalId::Eq, t_ns),
            sense_p: schedule.is_asserted(SignalId::SenseP, t_ns),
            sense_n: schedule.is_asserted(SignalId::SenseN, t_ns),
        }
    }

    /// Electrical level of each line; SENSE_P is low while asserted.
    pub fn electrical(&self) -> [u8; 4] {
        [self.wl as u8, self.eq as u8, (!self.sense_p) as u8, self.sense_n as u8]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadValue {
    Zero,
    One,
    Metastable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformSample {
    pub t_ns: f64,
    pub state: CellState,
    pub levels: SignalLevels,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Waveform {
    pub dt_ns: f64,
    pub samples: Vec<WaveformSample>,
}

impl Waveform {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_ns,v_cell,v_bl,v_blb,wl,eq,sense_p,sense_n\n");
        for s in &self.samples {
            let [wl, eq, sp, sn] = s.levels.electrical();
            let _ = writeln!(
                out,
                "{:.3},{:.6},{:.6},{:.6},{wl},{eq},{sp},{sn}",
                s.t_ns, s.state.v_cell, s.state.v_bl, s.state.v_blb
            );
        }
        out
    }

    pub fn last(&self) -> Option<&WaveformSample> {
        self.samples.last()
    }
}

fn clamp(s: CellState, vdd: f64) -> CellState {
    CellState {
        v_cell: s.v_cell.clamp(0.0, vdd),
        v_bl: s.v_bl.clamp(0.0, vdd),
        v_blb: s.v_blb.clamp(0.0, vdd),
    }
}

/// Per-ns coefficients precomputed from the parameters.
#[derive(Clone, Copy)]
struct Rates {
    vdd: f64,
    half: f64,
    wl: f64,
    share_cell: f64,
    share_bl: f64,
    eq: f64,
    gain: f64,
    drive: f64,
    leak: f64,
    offset: f64,
}

impl Rates {
    fn new(p: &CircuitParams, v: &VariationSample) -> Self {
        let total = p.c_cell + p.c_bl;
        Self {
            vdd: p.vdd,
            half: p.half(),
            wl: 1e-9 / p.tau_wl,
            share_cell: p.c_bl / total,
            share_bl: p.c_cell / total,
            eq: 1e-9 / p.tau_eq,
            gain: p.sa_gain * 1e-9,
            drive: 1e-9 / p.tau_half,
            leak: v.leak_rate * 1e-9,
            offset: v.sa_offset_v + v.read_noise_v + p.sa_imbalance_v,
        }
    }

    fn derivative(&self, s: &CellState, l: SignalLevels) -> CellState {
        let mut d = CellState { v_cell: 0.0, v_bl: 0.0, v_blb: 0.0 };
        if l.wl {
            // Charge sharing; the transfer is split so that charge is conserved.
            let i = (s.v_cell - s.v_bl) * self.wl;
            d.v_cell -= i * self.share_cell;
            d.v_bl += i * self.share_bl;
        } else {
            d.v_cell -= self.leak * (s.v_cell - self.half);
        }
        if l.eq {
            d.v_bl += (self.half - s.v_bl) * self.eq;
            d.v_blb += (self.half - s.v_blb) * self.eq;
        }
        match (l.sense_p, l.sense_n) {
            (true, true) => {
                let x = (s.v_bl - s.v_blb) + 2.0 * self.offset;
                d.v_bl += self.gain * x / 2.0;
                d.v_blb -= self.gain * x / 2.0;
            }
            (false, true) => d.v_bl -= s.v_bl * self.drive,
            (true, false) => d.v_bl += (self.vdd - s.v_bl) * self.drive,
            (false, false) => {}
        }
        d
    }

    fn rk4(&self, s: &CellState, l: SignalLevels, dt: f64) -> CellState {
        let add = |a: &CellState, k: &CellState, h: f64| {
            clamp(
                CellState {
                    v_cell: a.v_cell + h * k.v_cell,
                    v_bl: a.v_bl + h * k.v_bl,
                    v_blb: a.v_blb + h * k.v_blb,
                },
                self.vdd,
            )
        };
        let k1 = self.derivative(s, l);
        let k2 = self.derivative(&add(s, &k1, dt / 2.0), l);
        let k3 = self.derivative(&add(s, &k2, dt / 2.0), l);
        let k4 = self.derivative(&add(s, &k3, dt), l);
        let k = CellState {
            v_cell: (k1.v_cell + 2.0 * k2.v_cell + 2.0 * k3.v_cell + k4.v_cell) / 6.0,
            v_bl: (k1.v_bl + 2.0 * k2.v_bl + 2.0 * k3.v_bl + k4.v_bl) / 6.0,
            v_blb: (k1.v_blb + 2.0 * k2.v_blb + 2.0 * k3.v_blb + k4.v_blb) / 6.0,
        };
        let mut next = add(s, &k, dt);
        if !l.sense_p && !l.sense_n {
            // Without an enabled amplifier the complement bitline mirrors
            // the true one around vdd/2.
            next.v_blb = self.vdd - next.v_bl;
        }
        next
    }
}

/// One integration step of `p.dt_ns`.
pub fn step(state: &CellState, levels: SignalLevels, p: &CircuitParams, v: &VariationSample) -> CellState {
    Rates::new(p, v).rk4(state, levels, p.dt_ns)
}

fn check_inputs(schedule: &SignalSchedule, initial: &CellState, p: &CircuitParams) -> Result<(), CircuitError> {
    let report = schedule.validate();
    if !report.is_valid() {
        return Err(CircuitError::Schedule(report));
    }
    p.validate(schedule.step_ns)?;
    for v in [initial.v_cell, initial.v_bl, initial.v_blb] {
        if !(0.0..=p.vdd).contains(&v) {
            return Err(CircuitError::InitialVoltage(v));
        }
    }
    Ok(())
}

fn n_steps(duration_ns: f64, dt_ns: f64) -> usize {
    (duration_ns / dt_ns).round() as usize
}

/// Integrates the whole window, calling `visit` with the time, the state at
/// that time and the levels driving the step that follows.
fn integrate(
    schedule: &SignalSchedule,
    initial: CellState,
    p: &CircuitParams,
    rates: &Rates,
    mut visit: impl FnMut(f64, &CellState, SignalLevels),
) -> CellState {
    let n = n_steps(schedule.window_ns as f64, p.dt_ns);
    let mut s = initial;
    for k in 0..n {
        let t = k as f64 * p.dt_ns;
        // Evaluate slightly after the grid point so an edge at an exact
        // multiple of dt applies from that step on despite rounding.
        let levels = SignalLevels::at(schedule, t + p.dt_ns * 1e-6);
        visit(t, &s, levels);
        s = rates.rk4(&s, levels, p.dt_ns);
    }
    let t_end = n as f64 * p.dt_ns;
    visit(t_end, &s, SignalLevels::at(schedule, t_end + p.dt_ns * 1e-6));
    s
}

/// Plays `schedule` from `initial` and returns the sampled waveform along
/// with the final state.
pub fn run(
    schedule: &SignalSchedule,
    initial: CellState,
    p: &CircuitParams,
    v: &VariationSample,
) -> Result<(Waveform, CellState), CircuitError> {
    check_inputs(schedule, &initial, p)?;
    let rates = Rates::new(p, v);
    let mut samples = Vec::with_capacity(n_steps(schedule.window_ns as f64, p.dt_ns) + 1);
    let last = integrate(schedule, initial, p, &rates, |t_ns, s, levels| {
        samples.push(WaveformSample { t_ns, state: *s, levels })
    });
    Ok((Waveform { dt_ns: p.dt_ns, samples }, last))
}

/// Same as [`run`] without recording the waveform.
pub fn run_final(
    schedule: &SignalSchedule,
    initial: CellState,
    p: &CircuitParams,
    v: &VariationSample,
) -> Result<CellState, CircuitError> {
    check_inputs(schedule, &initial, p)?;
    Ok(integrate(schedule, initial, p, &Rates::new(p, v), |_, _, _| {}))
}

/// Runs schedules back to back. Each entry carries an idle gap (in ns)
/// integrated after the schedule with every signal deasserted.
pub fn run_sequence(
    commands: &[(SignalSchedule, f64)],
    initial: CellState,
    p: &CircuitParams,
    v: &VariationSample,
) -> Result<CellState, CircuitError> {
    let rates = Rates::new(p, v);
    let mut s = initial;
    for (schedule, gap_ns) in commands {
        check_inputs(schedule, &s, p)?;
        s = integrate(schedule, s, p, &rates, |_, _, _| {});
        if !(gap_ns.is_finite() && *gap_ns >= 0.0) {
            return Err(CircuitError::NonPositive("gap_ns"));
        }
        for _ in 0..n_steps(*gap_ns, p.dt_ns) {
            s = rates.rk4(&s, SignalLevels::default(), p.dt_ns);
        }
    }
    Ok(s)
}

/// Value sensed on the true bitline.
pub fn read_value(state: &CellState, p: &CircuitParams) -> ReadValue {
    if state.v_bl > p.half() + p.metastable_band {
        ReadValue::One
    } else if state.v_bl < p.half() - p.metastable_band {
        ReadValue::Zero
    } else {
        ReadValue::Metastable
    }
}
