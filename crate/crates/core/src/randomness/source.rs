use super::{BitStream, RandomnessError};
use crate::puf::{build_subarray, respond, Challenge, FilterPolicy, PufCalibration};
use crate::rng;
use crate::variation::{PvSpec, RngSeed};

/// Von Neumann whitening of a stream of `len` bits given only the sorted
/// positions of its ones. Equivalent to [`super::von_neumann`] on the dense
/// stream.
pub fn sparse_von_neumann(ones: &[u64], len: u64) -> BitStream {
    let mut out = BitStream::new();
    let pairs = len / 2;
    let mut i = 0;
    while i < ones.len() {
        let pair = ones[i] / 2;
        if pair >= pairs {
            break;
        }
        let both = i + 1 < ones.len() && ones[i + 1] / 2 == pair;
        if both {
            i += 2;
            continue;
        }
        // Only pairs with exactly one set bit produce output: 10 -> 1, 01 -> 0.
        out.push(ones[i].is_multiple_of(2));
        i += 1;
    }
    out
}

/// Where the raw CODIC-sig bits come from: a sequence of simulated chips,
/// each read once without filtering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamSource {
    pub seed: RngSeed,
    pub read_seed: RngSeed,
    pub cells_per_chip: u64,
    pub spec: PvSpec,
    pub calib: PufCalibration,
}

impl StreamSource {
    pub fn new(seed: RngSeed) -> Self {
        Self {
            seed,
            read_seed: RngSeed(rng::derive(seed.0, &[0x2EAD])),
            cells_per_chip: 1 << 28,
            spec: PvSpec { pv_percent: 4.0, temperature_c: 30.0 },
            calib: PufCalibration::default(),
        }
    }
}

/// Concatenates the raw read-out of successive chips in address order,
/// whitens it and returns the first `target_bits` output bits.
pub fn codic_sig_stream(src: &StreamSource, target_bits: usize) -> Result<BitStream, RandomnessError> {
    let mut out = BitStream::new();
    let mut chip = 0u64;
    while out.len() < target_bits {
        let sub = build_subarray(RngSeed(rng::derive(src.seed.0, &[chip])), src.cells_per_chip, src.spec, &src.calib)?;
        let whole = Challenge { segment_base: 0, segment_size: src.cells_per_chip / 8 };
        let resp = respond(&sub, &whole, &FilterPolicy::UNFILTERED, src.read_seed)?;
        let bits = sparse_von_neumann(resp.addrs(), src.cells_per_chip);
        if bits.is_empty() {
            // A chip without variation reads a constant and never will yield bits.
            break;
        }
        out.extend(&bits);
        chip += 1;
    }
    out.truncate(target_bits);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::von_neumann;

    #[test]
    fn sparse_matches_dense_small() {
        let dense = BitStream::from_ascii("0110110001011100").unwrap();
        let ones: Vec<u64> = (0..dense.len() as u64).filter(|&i| dense.bits()[i as usize] == 1).collect();
        assert_eq!(sparse_von_neumann(&ones, dense.len() as u64), von_neumann(&dense));
    }

    #[test]
    fn odd_tail_is_ignored() {
        assert!(sparse_von_neumann(&[4], 5).is_empty());
    }
}
