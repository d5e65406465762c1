use serde::{Deserialize, Serialize};

use super::SchedulerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DramGeometry {
    pub channels: u32,
    pub ranks: u32,
    pub banks_per_rank: u32,
    pub rows_per_bank: u32,
    pub row_size_bytes: u32,
    pub chip_width_bits: u32,
    pub chips_per_rank: u32,
}

impl Default for DramGeometry {
    fn default() -> Self {
        Self::ddr3_module(8 << 30)
    }
}

impl DramGeometry {
    /// One channel, one rank of eight x8 chips, eight banks and 8KB rows.
    pub fn ddr3_module(capacity_bytes: u64) -> Self {
        let row = 8192u64;
        let banks = 8u64;
        Self {
            channels: 1,
            ranks: 1,
            banks_per_rank: banks as u32,
            rows_per_bank: (capacity_bytes / (banks * row)) as u32,
            row_size_bytes: row as u32,
            chip_width_bits: 8,
            chips_per_rank: 8,
        }
    }

    pub fn validate(&self) -> Result<(), SchedulerError> {
        let err = |m: &str| Err(SchedulerError::Geometry(m.to_string()));
        if self.channels == 0 || self.ranks == 0 {
            return err("channels and ranks must be positive");
        }
        if ![4, 8, 16].contains(&self.banks_per_rank) {
            return err("banks_per_rank must be 4, 8 or 16");
        }
        if self.row_size_bytes == 0 || !self.row_size_bytes.is_multiple_of(64) {
            return err("row size must be a positive multiple of 64 bytes");
        }
        let rank_width_bytes = self.chip_width_bits as u64 * self.chips_per_rank as u64 / 8;
        if rank_width_bytes == 0 || !(self.row_size_bytes as u64).is_multiple_of(rank_width_bytes) {
            return err("row size must split evenly across the chips of a rank");
        }
        Ok(())
    }

    pub fn total_banks(&self) -> u32 {
        self.channels * self.ranks * self.banks_per_rank
    }

    pub fn total_rows(&self) -> u64 {
        self.total_banks() as u64 * self.rows_per_bank as u64
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.total_rows() * self.row_size_bytes as u64
    }

    /// Global rank index of a flat bank id.
    pub fn rank_of(&self, bank: u32) -> u32 {
        bank / self.banks_per_rank
    }

    pub fn channel_of(&self, bank: u32) -> u32 {
        bank / (self.banks_per_rank * self.ranks)
    }

    pub fn total_ranks(&self) -> u32 {
        self.channels * self.ranks
    }

    /// Cache-line write bursts needed to overwrite one row.
    pub fn lines_per_row(&self) -> u32 {
        self.row_size_bytes / 64
    }
}
