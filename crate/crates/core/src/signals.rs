//! Internal DRAM signal schedules, validation, variant counting and
//! mode-register encoding.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default length of the programmable timing window.
pub const WINDOW_NS: u32 = 25;
/// Default granularity of edge placement.
pub const STEP_NS: u32 = 1;

const MRS_FIELD_BITS: u32 = 10;
const MRS_TIME_BITS: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignalError {
    #[error("window of {window_ns} ns is not a multiple of the {step_ns} ns step")]
    WindowNotMultiple { window_ns: u32, step_ns: u32 },
    #[error("window of {window_ns} ns must hold at least two {step_ns} ns steps")]
    WindowTooShort { window_ns: u32, step_ns: u32 },
    #[error("step must be positive")]
    ZeroStep,
    #[error("variant count overflows u128")]
    Overflow,
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("schedule is invalid: {0}")]
    Invalid(ValidationReport),
    #[error("malformed schedule file: {0}")]
    Parse(String),
}

/// One of the four controllable internal signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalId {
    Wl,
    Eq,
    SenseP,
    SenseN,
}

impl SignalId {
    pub const ALL: [SignalId; 4] = [SignalId::Wl, SignalId::Eq, SignalId::SenseP, SignalId::SenseN];

    pub fn index(self) -> usize {
        match self {
            SignalId::Wl => 0,
            SignalId::Eq => 1,
            SignalId::SenseP => 2,
            SignalId::SenseN => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SignalId::Wl => "wl",
            SignalId::Eq => "eq",
            SignalId::SenseP => "sense_p",
            SignalId::SenseN => "sense_n",
        }
    }

    pub fn polarity(self) -> Polarity {
        match self {
            SignalId::SenseP => Polarity::ActiveLow,
            _ => Polarity::ActiveHigh,
        }
    }
}

impl fmt::Display for SignalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalId {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wl" => Ok(SignalId::Wl),
            "eq" => Ok(SignalId::Eq),
            "sense_p" => Ok(SignalId::SenseP),
            "sense_n" => Ok(SignalId::SenseN),
            _ => Err(SignalError::UnknownSignal(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    ActiveHigh,
    ActiveLow,
}

/// Assertion interval `[init_ns, end_ns)` of one signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalEdgePair {
    pub init_ns: u32,
    pub end_ns: u32,
}

impl SignalEdgePair {
    pub const fn new(init_ns: u32, end_ns: u32) -> Self {
        Self { init_ns, end_ns }
    }
}

/// Named schedules with known semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Activate,
    Precharge,
    Sig,
    SigOpt,
    DetZero,
    DetOne,
    Esa,
}

impl VariantName {
    pub const ALL: [VariantName; 7] = [
        VariantName::Activate,
        VariantName::Precharge,
        VariantName::Sig,
        VariantName::SigOpt,
        VariantName::DetZero,
        VariantName::DetOne,
        VariantName::Esa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VariantName::Activate => "activate",
            VariantName::Precharge => "precharge",
            VariantName::Sig => "sig",
            VariantName::SigOpt => "sig_opt",
            VariantName::DetZero => "det_zero",
            VariantName::DetOne => "det_one",
            VariantName::Esa => "esa",
        }
    }

    pub fn schedule(self) -> SignalSchedule {
        use SignalId::*;
        let s = SignalSchedule::empty();
        match self {
            VariantName::Activate => s.with(Wl, 5, 22).with(SenseP, 7, 22).with(SenseN, 7, 22),
            VariantName::Precharge => s.with(Eq, 5, 11),
            VariantName::Sig => s.with(Wl, 5, 22).with(Eq, 7, 22),
            VariantName::SigOpt => s.with(Wl, 5, 10).with(Eq, 7, 10),
            VariantName::DetZero => s.with(Wl, 5, 22).with(SenseN, 7, 22).with(SenseP, 14, 22),
            VariantName::DetOne => s.with(Wl, 5, 22).with(SenseP, 7, 22).with(SenseN, 14, 22),
            VariantName::Esa => s.with(SenseP, 3, 22).with(SenseN, 3, 22).with(Wl, 5, 22),
        }
    }
}

impl fmt::Display for VariantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantName {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        VariantName::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| SignalError::UnknownVariant(s.to_string()))
    }
}

/// Edge times for up to four signals inside a fixed window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignalSchedule {
    pub window_ns: u32,
    pub step_ns: u32,
    edges: [Option<SignalEdgePair>; 4],
}

impl Default for SignalSchedule {
    fn default() -> Self {
        Self::empty()
    }
}

impl SignalSchedule {
    pub fn empty() -> Self {
        Self { window_ns: WINDOW_NS, step_ns: STEP_NS, edges: [None; 4] }
    }

    pub fn with_window(window_ns: u32, step_ns: u32) -> Self {
        Self { window_ns, step_ns, edges: [None; 4] }
    }

    pub fn with(mut self, id: SignalId, init_ns: u32, end_ns: u32) -> Self {
        self.set(id, Some(SignalEdgePair::new(init_ns, end_ns)));
        self
    }

    pub fn set(&mut self, id: SignalId, edge: Option<SignalEdgePair>) {
        self.edges[id.index()] = edge;
    }

    pub fn get(&self, id: SignalId) -> Option<SignalEdgePair> {
        self.edges[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (SignalId, SignalEdgePair)> + '_ {
        SignalId::ALL.into_iter().filter_map(move |id| self.get(id).map(|e| (id, e)))
    }

    /// Whether `id` is asserted at time `t_ns`.
    pub fn is_asserted(&self, id: SignalId, t_ns: f64) -> bool {
        match self.get(id) {
            Some(e) => t_ns >= e.init_ns as f64 && t_ns < e.end_ns as f64,
            None => false,
        }
    }

    /// Latest legal edge time.
    pub fn last_slot_ns(&self) -> u32 {
        self.window_ns.saturating_sub(self.step_ns)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

impl fmt::Display for SignalSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (id, e) in self.iter() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}[{},{}]", id, e.init_ns, e.end_ns)?;
        }
        if first {
            f.write_str("(idle)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    InitNotBeforeEnd,
    InitOutsideWindow,
    EndOutsideWindow,
    OffStep,
    WindowNotMultiple,
    WindowTooShort,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::InitNotBeforeEnd => "init >= end",
            Rule::InitOutsideWindow => "init outside window",
            Rule::EndOutsideWindow => "end outside window",
            Rule::OffStep => "edge not a multiple of step",
            Rule::WindowNotMultiple => "window not a multiple of step",
            Rule::WindowTooShort => "window shorter than two steps",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub signal: Option<SignalId>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.signal {
            Some(s) => write!(f, "{s}: {}", self.rule),
            None => write!(f, "{}", self.rule),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, signal: Option<SignalId>, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.signal == signal && v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate(s: &SignalSchedule) -> ValidationReport {
    let mut violations = Vec::new();
    let step = s.step_ns;
    if step == 0 {
        violations.push(Violation { signal: None, rule: Rule::WindowNotMultiple });
        return ValidationReport { violations };
    }
    if !s.window_ns.is_multiple_of(step) {
        violations.push(Violation { signal: None, rule: Rule::WindowNotMultiple });
    }
    if s.window_ns < 2 * step {
        violations.push(Violation { signal: None, rule: Rule::WindowTooShort });
    }
    let last = s.last_slot_ns();
    for (id, e) in s.iter() {
        let mut push = |rule| violations.push(Violation { signal: Some(id), rule });
        if e.init_ns >= e.end_ns {
            push(Rule::InitNotBeforeEnd);
        }
        if e.init_ns > last {
            push(Rule::InitOutsideWindow);
        }
        if e.end_ns > last {
            push(Rule::EndOutsideWindow);
        }
        if e.init_ns % step != 0 || e.end_ns % step != 0 {
            push(Rule::OffStep);
        }
    }
    ValidationReport { violations }
}

/// Number of distinct schedules for `num_signals` signals when every signal
/// gets one ordered pair of edge slots.
pub fn count_variants(window_ns: u32, step_ns: u32, num_signals: u32) -> Result<u128, SignalError> {
    if step_ns == 0 {
        return Err(SignalError::ZeroStep);
    }
    if !window_ns.is_multiple_of(step_ns) {
        return Err(SignalError::WindowNotMultiple { window_ns, step_ns });
    }
    if window_ns < 2 * step_ns {
        return Err(SignalError::WindowTooShort { window_ns, step_ns });
    }
    let w = (window_ns / step_ns) as u128;
    let pairs = w * (w - 1) / 2;
    pairs.checked_pow(num_signals).ok_or(SignalError::Overflow)
}

/// Packed mode-register image: one 10-bit field per signal (init in the high
/// five bits, end in the low five) plus a presence mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ModeRegisterImage {
    pub fields: [u16; 4],
    pub present: [bool; 4],
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MrsError {
    #[error("{signal}: {reason}")]
    Field { signal: SignalId, reason: &'static str },
    #[error("schedule cannot be encoded: {0}")]
    Unencodable(ValidationReport),
    #[error("bad mode-register image `{0}`")]
    Syntax(String),
}

impl ModeRegisterImage {
    pub fn bits(&self) -> u64 {
        self.fields.iter().fold(0u64, |acc, &f| (acc << MRS_FIELD_BITS) | f as u64)
    }

    pub fn mask(&self) -> u8 {
        self.present.iter().fold(0u8, |acc, &p| (acc << 1) | p as u8)
    }

    pub fn from_bits(bits: u64, mask: u8) -> Result<Self, MrsError> {
        if bits >> (4 * MRS_FIELD_BITS) != 0 || mask > 0xF {
            return Err(MrsError::Syntax(format!("{bits:#x}/{mask:04b}")));
        }
        let mut img = ModeRegisterImage::default();
        for i in 0..4 {
            let shift = (3 - i) as u32 * MRS_FIELD_BITS;
            img.fields[i] = ((bits >> shift) & 0x3FF) as u16;
            img.present[i] = (mask >> (3 - i)) & 1 == 1;
        }
        Ok(img)
    }

    /// `0x` followed by ten hex digits.
    pub fn to_hex(&self) -> String {
        format!("{:#012x}", self.bits())
    }

    /// Parses `0x<hex>` or `0x<hex>/<4-bit mask>`; without a mask, a signal
    /// is present when its field is non-zero.
    pub fn parse(text: &str) -> Result<Self, MrsError> {
        let bad = || MrsError::Syntax(text.to_string());
        let (hex, mask) = match text.split_once('/') {
            Some((h, m)) => (h, Some(u8::from_str_radix(m, 2).map_err(|_| bad())?)),
            None => (text, None),
        };
        let hex = hex.strip_prefix("0x").or_else(|| hex.strip_prefix("0X")).ok_or_else(bad)?;
        let bits = u64::from_str_radix(hex, 16).map_err(|_| bad())?;
        let mask = match mask {
            Some(m) => m,
            None => (0..4).fold(0u8, |acc, i| {
                let field = (bits >> ((3 - i) * MRS_FIELD_BITS)) & 0x3FF;
                (acc << 1) | (field != 0) as u8
            }),
        };
        Self::from_bits(bits, mask)
    }
}

impl fmt::Display for ModeRegisterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{:04b}", self.to_hex(), self.mask())
    }
}

pub fn encode_mrs(s: &SignalSchedule) -> Result<ModeRegisterImage, MrsError> {
    let report = validate(s);
    if !report.is_valid() || s.window_ns != WINDOW_NS {
        return Err(MrsError::Unencodable(report));
    }
    let mut img = ModeRegisterImage::default();
    for (id, e) in s.iter() {
        img.fields[id.index()] = ((e.init_ns as u16) << MRS_TIME_BITS) | e.end_ns as u16;
        img.present[id.index()] = true;
    }
    Ok(img)
}

pub fn decode_mrs(img: &ModeRegisterImage) -> Result<SignalSchedule, MrsError> {
    let mut s = SignalSchedule::empty();
    let last = s.last_slot_ns();
    for id in SignalId::ALL {
        let field = img.fields[id.index()];
        if !img.present[id.index()] {
            if field != 0 {
                return Err(MrsError::Field { signal: id, reason: "field set on absent signal" });
            }
            continue;
        }
        if field >> MRS_FIELD_BITS != 0 {
            return Err(MrsError::Field { signal: id, reason: "field wider than 10 bits" });
        }
        let init = (field >> MRS_TIME_BITS) as u32;
        let end = (field & 0x1F) as u32;
        if init > last || end > last {
            return Err(MrsError::Field { signal: id, reason: "edge outside window" });
        }
        if init >= end {
            return Err(MrsError::Field { signal: id, reason: "init >= end" });
        }
        s.set(id, Some(SignalEdgePair::new(init, end)));
    }
    Ok(s)
}

/// On-disk form of a schedule.
///
/// ```toml
/// window_ns = 25
/// [signal.wl]
/// init_ns = 5
/// end_ns = 22
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_ns: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_ns: Option<u32>,
    #[serde(default)]
    pub signal: BTreeMap<String, SignalEdgePair>,
}

impl ScheduleFile {
    pub fn into_schedule(self) -> Result<SignalSchedule, SignalError> {
        let mut s = SignalSchedule::with_window(
            self.window_ns.unwrap_or(WINDOW_NS),
            self.step_ns.unwrap_or(STEP_NS),
        );
        for (name, edge) in self.signal {
            let id: SignalId = name.parse()?;
            s.set(id, Some(edge));
        }
        Ok(s)
    }

    pub fn from_schedule(s: &SignalSchedule) -> Self {
        Self {
            window_ns: Some(s.window_ns),
            step_ns: Some(s.step_ns),
            signal: s.iter().map(|(id, e)| (id.name().to_string(), e)).collect(),
        }
    }
}

/// Parses a TOML schedule. The result is not validated.
pub fn parse_schedule(text: &str) -> Result<SignalSchedule, SignalError> {
    let file: ScheduleFile = toml::from_str(text).map_err(|e| SignalError::Parse(e.to_string()))?;
    file.into_schedule()
}

pub fn schedule_to_toml(s: &SignalSchedule) -> String {
    toml::to_string(&ScheduleFile::from_schedule(s)).expect("schedule serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_valid() {
        for v in VariantName::ALL {
            assert!(v.schedule().validate().is_valid(), "{v}");
        }
    }

    #[test]
    fn wl_field_layout() {
        let img = encode_mrs(&SignalSchedule::empty().with(SignalId::Wl, 5, 22)).unwrap();
        assert_eq!(img.fields[0], 0b00101_10110);
        assert_eq!(img.to_hex(), "0x2d80000000");
        assert_eq!(ModeRegisterImage::parse("0x2d80000000").unwrap(), img);
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in VariantName::ALL {
            assert_eq!(v.name().parse::<VariantName>().unwrap(), v);
        }
        assert!("det".parse::<VariantName>().is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let s = VariantName::DetZero.schedule();
        assert_eq!(parse_schedule(&schedule_to_toml(&s)).unwrap(), s);
        assert!(parse_schedule("[signal.wl]\ninit_ns = 1\nend_ns = 2\nfoo = 3\n").is_err());
        assert!(parse_schedule("[signal.xx]\ninit_ns = 1\nend_ns = 2\n").is_err());
    }

    #[test]
    fn display_lists_edges() {
        assert_eq!(VariantName::SigOpt.schedule().to_string(), "wl[5,10] eq[7,10]");
    }
}
