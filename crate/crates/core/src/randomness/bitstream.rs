use super::RandomnessError;

/// Ordered bits, one per byte, each 0 or 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitStream {
    bits: Vec<u8>,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        Self { bits: bits.into_iter().map(u8::from).collect() }
    }

    /// Parses `0`/`1` characters, ignoring whitespace.
    pub fn from_ascii(text: &str) -> Result<Self, RandomnessError> {
        let mut bits = Vec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                c => return Err(RandomnessError::BadChar(c)),
            }
        }
        Ok(Self { bits })
    }

    /// Unpacks bytes most-significant bit first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let bits = bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1)).collect();
        Self { bits }
    }

    /// Packs most-significant bit first; a trailing partial byte is zero padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << (7 - i))))
            .collect()
    }

    pub fn to_ascii(&self) -> String {
        self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit as u8);
    }

    pub fn extend(&mut self, other: &BitStream) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn truncate(&mut self, len: usize) {
        self.bits.truncate(len);
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// Non-overlapping pairs: 01 gives 0, 10 gives 1, 00 and 11 are dropped.
pub fn von_neumann(input: &BitStream) -> BitStream {
    let bits = input.bits.chunks_exact(2).filter(|p| p[0] != p[1]).map(|p| p[0]).collect();
    BitStream { bits }
}
