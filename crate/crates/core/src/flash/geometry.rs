use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Flat chip index. Chip `k` of a channel sits at `k * num_channels + channel`,
/// so ascending index order visits every channel at one chip offset before
/// moving to the next offset.
pub type ChipId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub num_channels: u32,
    pub chips_per_channel: u32,
    pub dies_per_chip: u32,
    pub planes_per_die: u32,
    pub blocks_per_die: u32,
    pub pages_per_block: u32,
    pub page_size: u32,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            num_channels: 8,
            chips_per_channel: 8,
            dies_per_chip: 2,
            planes_per_die: 4,
            blocks_per_die: 8192,
            pages_per_block: 128,
            page_size: 2048,
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_channels", self.num_channels),
            ("chips_per_channel", self.chips_per_channel),
            ("dies_per_chip", self.dies_per_chip),
            ("planes_per_die", self.planes_per_die),
            ("blocks_per_die", self.blocks_per_die),
            ("pages_per_block", self.pages_per_block),
            ("page_size", self.page_size),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(SimError::Config(format!("geometry.{name} must be >= 1")));
            }
        }
        if self.planes_per_die > 64 || self.dies_per_chip > 64 {
            return Err(SimError::Config("at most 64 dies per chip and 64 planes per die".into()));
        }
        if !self.blocks_per_die.is_multiple_of(self.planes_per_die) {
            return Err(SimError::Config(
                "geometry.blocks_per_die must be a multiple of planes_per_die".into(),
            ));
        }
        Ok(())
    }

    /// Square-ish channel split used by chip-count sweeps: 64 -> 8x8, 256 -> 16x16.
    pub fn with_total_chips(&self, chips: u32) -> Geometry {
        let mut ch = (chips as f64).sqrt().floor() as u32;
        while ch > 1 && !chips.is_multiple_of(ch) {
            ch -= 1;
        }
        let ch = ch.max(1);
        Geometry { num_channels: ch, chips_per_channel: chips / ch, ..self.clone() }
    }

    pub fn total_chips(&self) -> usize {
        (self.num_channels * self.chips_per_channel) as usize
    }

    /// Requests one chip can absorb in a single transaction (n x m).
    pub fn max_txn(&self) -> usize {
        (self.dies_per_chip * self.planes_per_die) as usize
    }

    pub fn blocks_per_plane(&self) -> u32 {
        self.blocks_per_die / self.planes_per_die
    }

    pub fn chip_id(&self, channel: u32, chip: u32) -> ChipId {
        (chip * self.num_channels + channel) as usize
    }

    /// (channel, chip-within-channel) for a flat index.
    pub fn chip_coords(&self, id: ChipId) -> (u32, u32) {
        let id = id as u32;
        (id % self.num_channels, id / self.num_channels)
    }

    pub fn pages_per_plane(&self) -> u64 {
        self.blocks_per_plane() as u64 * self.pages_per_block as u64
    }

    pub fn pages_per_chip(&self) -> u64 {
        self.blocks_per_die as u64 * self.pages_per_block as u64 * self.dies_per_chip as u64
    }

    pub fn raw_pages(&self) -> u64 {
        self.pages_per_chip() * self.total_chips() as u64
    }

    pub fn planes_total(&self) -> usize {
        self.total_chips() * (self.dies_per_chip * self.planes_per_die) as usize
    }

    /// Dense index of a (chip, die, plane) triple.
    pub fn plane_index(&self, chip: ChipId, die: u32, plane: u32) -> usize {
        (chip * self.dies_per_chip as usize + die as usize) * self.planes_per_die as usize
            + plane as usize
    }

    pub fn die_index(&self, chip: ChipId, die: u32) -> usize {
        chip * self.dies_per_chip as usize + die as usize
    }

    /// Home (chip, die, plane) of a virtual page under channel-first striping.
    pub fn stripe(&self, vpage: u64) -> (ChipId, u32, u32) {
        let c = self.num_channels as u64;
        let k = self.chips_per_channel as u64;
        let n = self.dies_per_chip as u64;
        let m = self.planes_per_die as u64;
        let channel = vpage % c;
        let chip = (vpage / c) % k;
        let die = (vpage / (c * k)) % n;
        let plane = (vpage / (c * k * n)) % m;
        (self.chip_id(channel as u32, chip as u32), die as u32, plane as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhysicalAddress {
    pub channel: u32,
    pub chip: u32,
    pub die: u32,
    pub plane: u32,
    pub block: u32,
    pub page: u32,
}

impl PhysicalAddress {
    pub fn chip_id(&self, g: &Geometry) -> ChipId {
        g.chip_id(self.channel, self.chip)
    }

    pub fn in_bounds(&self, g: &Geometry) -> bool {
        self.channel < g.num_channels
            && self.chip < g.chips_per_channel
            && self.die < g.dies_per_chip
            && self.plane < g.planes_per_die
            && self.block < g.blocks_per_plane()
            && self.page < g.pages_per_block
    }

    /// Dense page number, unique per geometry.
    pub fn ppn(&self, g: &Geometry) -> u64 {
        let plane = g.plane_index(self.chip_id(g), self.die, self.plane) as u64;
        (plane * g.blocks_per_plane() as u64 + self.block as u64) * g.pages_per_block as u64
            + self.page as u64
    }

    pub fn from_ppn(ppn: u64, g: &Geometry) -> PhysicalAddress {
        let page = (ppn % g.pages_per_block as u64) as u32;
        let rest = ppn / g.pages_per_block as u64;
        let block = (rest % g.blocks_per_plane() as u64) as u32;
        let plane_idx = rest / g.blocks_per_plane() as u64;
        let plane = (plane_idx % g.planes_per_die as u64) as u32;
        let die_idx = plane_idx / g.planes_per_die as u64;
        let die = (die_idx % g.dies_per_chip as u64) as u32;
        let chip = (die_idx / g.dies_per_chip as u64) as usize;
        let (channel, chip) = g.chip_coords(chip);
        PhysicalAddress { channel, chip, die, plane, block, page }
    }

    /// Global block identifier (the ppn of page 0 divided by pages_per_block).
    pub fn block_id(&self, g: &Geometry) -> u64 {
        self.ppn(g) / g.pages_per_block as u64
    }

    pub fn same_resource(&self, other: &PhysicalAddress) -> bool {
        self.channel == other.channel
            && self.chip == other.chip
            && self.die == other.die
            && self.plane == other.plane
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Read,
    Program,
    Erase,
}
