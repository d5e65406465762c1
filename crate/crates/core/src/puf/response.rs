use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::PufError;

/// Sorted, segment-relative addresses of cells that read the minority value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PufResponse {
    addrs: Vec<u64>,
}

impl PufResponse {
    pub(crate) fn from_sorted(addrs: Vec<u64>) -> Self {
        debug_assert!(addrs.windows(2).all(|w| w[0] < w[1]));
        Self { addrs }
    }

    /// Builds a response from arbitrary addresses, sorting and deduplicating.
    pub fn from_addrs(mut addrs: Vec<u64>) -> Self {
        addrs.sort_unstable();
        addrs.dedup();
        Self { addrs }
    }

    pub fn addrs(&self) -> &[u64] {
        &self.addrs
    }

    pub fn len(&self) -> usize {
        self.addrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addrs.is_empty()
    }

    pub fn contains(&self, addr: u64) -> bool {
        self.addrs.binary_search(&addr).is_ok()
    }

    pub fn intersection_len(&self, other: &PufResponse) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.addrs.len() && j < other.addrs.len() {
            match self.addrs[i].cmp(&other.addrs[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Line-oriented text: `#` comment header, then one decimal address per line.
    pub fn to_text(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
        for a in &self.addrs {
            let _ = writeln!(out, "{a}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, PufError> {
        let mut addrs: Vec<u64> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let a: u64 = line
                .parse()
                .map_err(|_| PufError::Parse { line: i + 1, reason: format!("`{line}` is not an address") })?;
            if addrs.last().is_some_and(|&prev| prev >= a) {
                return Err(PufError::Parse { line: i + 1, reason: "addresses must be strictly ascending".into() });
            }
            addrs.push(a);
        }
        Ok(Self { addrs })
    }
}

/// `|a ∩ b| / |a ∪ b|`, and 1 when both are empty.
pub fn jaccard(a: &PufResponse, b: &PufResponse) -> f64 {
    let inter = a.intersection_len(b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthDecision {
    Accept,
    Reject,
}

/// Exact-match authentication.
pub fn authenticate(enrolled: &PufResponse, probe: &PufResponse) -> AuthDecision {
    if enrolled == probe {
        AuthDecision::Accept
    } else {
        AuthDecision::Reject
    }
}
