//! Page-level mapping, allocation and garbage collection.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::flash::{ChipId, Geometry, PhysicalAddress};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VictimPolicy {
    #[default]
    GreedyMaxInvalid,
}

/// Explicit initial location of one virtual page.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub vpage: u64,
    #[serde(flatten)]
    pub addr: PhysicalAddress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FtlConfig {
    /// Fraction of raw capacity visible to the host.
    pub export_fraction: f64,
    /// GC starts on a die when its free-block fraction drops below this.
    pub free_block_threshold: f64,
    pub victim_policy: VictimPolicy,
    /// Fraction of the exported space filled with valid data before the run.
    pub precondition_fill: f64,
    pub precondition_io_bytes: u64,
    pub precondition_seed: u64,
    /// Write every page the workload reads before the run, so no read
    /// targets unwritten flash.
    pub prefill_reads: bool,
    pub placements: Vec<Placement>,
}

impl Default for FtlConfig {
    fn default() -> Self {
        FtlConfig {
            export_fraction: 0.9,
            free_block_threshold: 0.05,
            victim_policy: VictimPolicy::GreedyMaxInvalid,
            precondition_fill: 0.0,
            precondition_io_bytes: 1 << 20,
            precondition_seed: 0x5eed,
            prefill_reads: true,
            placements: Vec::new(),
        }
    }
}

impl FtlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.export_fraction > 0.0 && self.export_fraction <= 1.0) {
            return Err(SimError::Config("ftl.export_fraction must be in (0, 1]".into()));
        }
        if !(self.free_block_threshold > 0.0 && self.free_block_threshold < 1.0) {
            return Err(SimError::Config("ftl.free_block_threshold must be in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.precondition_fill) {
            return Err(SimError::Config("ftl.precondition_fill must be in [0, 1]".into()));
        }
        if self.precondition_io_bytes == 0 {
            return Err(SimError::Config("ftl.precondition_io_bytes must be > 0".into()));
        }
        Ok(())
    }
}

/// One live page moved by GC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Migration {
    pub vpage: u64,
    pub old: PhysicalAddress,
    pub new: PhysicalAddress,
}

impl Migration {
    /// True when the page left its (chip, die, plane); only such moves are
    /// reported to the scheduler.
    pub fn crosses_resource(&self) -> bool {
        !self.old.same_resource(&self.new)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MigrationReport {
    pub chip: ChipId,
    pub die: u32,
    /// Page 0 of the erased block.
    pub victim: PhysicalAddress,
    pub migrations: Vec<Migration>,
}

impl MigrationReport {
    pub fn notifications(&self) -> impl Iterator<Item = &Migration> {
        self.migrations.iter().filter(|m| m.crosses_resource())
    }
}

/// Page of a host request after translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubRequest {
    pub vpage: u64,
    /// `None` for a read of a page that was never written.
    pub addr: Option<PhysicalAddress>,
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockInfo {
    valid: u32,
    next_page: u32,
}

#[derive(Debug, Clone, Default)]
struct PlaneAlloc {
    active: Option<u32>,
    fresh_next: u32,
    free: VecDeque<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FtlStats {
    pub host_writes: u64,
    pub gc_runs: u64,
    pub gc_migrations: u64,
    pub gc_notifications: u64,
}

#[derive(Debug, Clone)]
pub struct Ftl {
    g: Geometry,
    cfg: FtlConfig,
    exported: u64,
    fwd: HashMap<u64, u64>,
    rev: HashMap<u64, u64>,
    blocks: HashMap<u64, BlockInfo>,
    planes: Vec<PlaneAlloc>,
    die_free: Vec<u32>,
    /// Full blocks per die keyed by (valid pages, block id): the first entry
    /// is the greedy victim.
    full: Vec<BTreeSet<(u32, u64)>>,
    gc_rr: Vec<u32>,
    stats: FtlStats,
}

impl Ftl {
    pub fn new(g: &Geometry, cfg: &FtlConfig) -> Result<Self> {
        g.validate()?;
        cfg.validate()?;
        let exported = ((g.raw_pages() as f64) * cfg.export_fraction).floor() as u64;
        if exported == 0 {
            return Err(SimError::Config("exported capacity is empty".into()));
        }
        let dies = g.total_chips() * g.dies_per_chip as usize;
        let mut ftl = Ftl {
            g: g.clone(),
            cfg: cfg.clone(),
            exported,
            fwd: HashMap::new(),
            rev: HashMap::new(),
            blocks: HashMap::new(),
            planes: vec![PlaneAlloc::default(); g.planes_total()],
            die_free: vec![g.blocks_per_die; dies],
            full: vec![BTreeSet::new(); dies],
            gc_rr: vec![0; dies],
            stats: FtlStats::default(),
        };
        for p in &cfg.placements {
            ftl.place(p.vpage, p.addr)?;
        }
        Ok(ftl)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.g
    }

    pub fn exported_pages(&self) -> u64 {
        self.exported
    }

    pub fn mapped_pages(&self) -> u64 {
        self.fwd.len() as u64
    }

    pub fn stats(&self) -> FtlStats {
        self.stats
    }

    pub fn free_blocks(&self, chip: ChipId, die: u32) -> u32 {
        self.die_free[self.g.die_index(chip, die)]
    }

    pub fn needs_gc(&self, chip: ChipId, die: u32) -> bool {
        (self.free_blocks(chip, die) as f64) < self.cfg.free_block_threshold * self.g.blocks_per_die as f64
    }

    fn check_range(&self, vpage: u64) -> Result<()> {
        if vpage >= self.exported {
            Err(SimError::OutOfRange { vpage, exported: self.exported })
        } else {
            Ok(())
        }
    }

    pub fn lookup(&self, vpage: u64) -> Option<PhysicalAddress> {
        self.fwd.get(&vpage).map(|&p| PhysicalAddress::from_ppn(p, &self.g))
    }

    /// Current location of a written page.
    pub fn translate(&self, vpage: u64) -> Result<PhysicalAddress> {
        self.check_range(vpage)?;
        self.lookup(vpage).ok_or(SimError::Unmapped(vpage))
    }

    /// Splits a byte range into pages and translates each; writes allocate.
    pub fn preprocess(&mut self, write: bool, offset: u64, length: u64) -> Result<Vec<SubRequest>> {
        let ps = self.g.page_size as u64;
        let first = offset / ps;
        let last = (offset + length.max(1) - 1) / ps;
        self.check_range(last)?;
        (first..=last)
            .map(|vpage| {
                let addr = if write { Some(self.write(vpage)?) } else { self.lookup(vpage) };
                Ok(SubRequest { vpage, addr })
            })
            .collect()
    }

    /// Out-of-place update of `vpage` in its home plane.
    pub fn write(&mut self, vpage: u64) -> Result<PhysicalAddress> {
        self.check_range(vpage)?;
        let (chip, die, plane) = self.g.stripe(vpage);
        let ppn = self.alloc_in_die(chip, die, plane)?;
        if let Some(old) = self.fwd.insert(vpage, ppn) {
            self.invalidate(old);
        }
        self.rev.insert(ppn, vpage);
        self.add_valid(ppn, 1);
        self.stats.host_writes += 1;
        Ok(PhysicalAddress::from_ppn(ppn, &self.g))
    }

    fn alloc_in_die(&mut self, chip: ChipId, die: u32, home: u32) -> Result<u64> {
        let m = self.g.planes_per_die;
        for i in 0..m {
            let plane = (home + i) % m;
            if let Some(ppn) = self.alloc(chip, die, plane) {
                return Ok(ppn);
            }
        }
        Err(SimError::CapacityExhausted { chip, die })
    }

    fn take_free_block(&mut self, pi: usize, die_idx: usize) -> Option<u32> {
        let bpp = self.g.blocks_per_plane();
        let pa = &mut self.planes[pi];
        let b = if let Some(b) = pa.free.pop_front() {
            b
        } else if pa.fresh_next < bpp {
            pa.fresh_next += 1;
            pa.fresh_next - 1
        } else {
            return None;
        };
        self.die_free[die_idx] -= 1;
        Some(b)
    }

    fn alloc(&mut self, chip: ChipId, die: u32, plane: u32) -> Option<u64> {
        let pi = self.g.plane_index(chip, die, plane);
        let di = self.g.die_index(chip, die);
        let ppb = self.g.pages_per_block;
        let block = match self.planes[pi].active {
            Some(b) => b,
            None => {
                let b = self.take_free_block(pi, di)?;
                self.planes[pi].active = Some(b);
                b
            }
        };
        let bid = pi as u64 * self.g.blocks_per_plane() as u64 + block as u64;
        let info = self.blocks.entry(bid).or_default();
        let page = info.next_page;
        info.next_page += 1;
        let valid = info.valid;
        if info.next_page == ppb {
            self.planes[pi].active = None;
            self.full[di].insert((valid, bid));
        }
        Some(bid * ppb as u64 + page as u64)
    }

    fn add_valid(&mut self, ppn: u64, delta: i32) {
        let ppb = self.g.pages_per_block;
        let bid = ppn / ppb as u64;
        let info = self.blocks.get_mut(&bid).expect("valid page in untracked block");
        let before = info.valid;
        info.valid = (before as i64 + delta as i64) as u32;
        let after = info.valid;
        if info.next_page == ppb {
            let di = self.die_of_block(bid);
            if self.full[di].remove(&(before, bid)) {
                self.full[di].insert((after, bid));
            }
        }
    }

    fn die_of_block(&self, bid: u64) -> usize {
        (bid / self.g.blocks_per_plane() as u64 / self.g.planes_per_die as u64) as usize
    }

    fn invalidate(&mut self, ppn: u64) {
        self.rev.remove(&ppn);
        self.add_valid(ppn, -1);
    }

    /// Pins `vpage` to `addr`, marking the block as written up to that page.
    pub fn place(&mut self, vpage: u64, addr: PhysicalAddress) -> Result<()> {
        self.check_range(vpage)?;
        if !addr.in_bounds(&self.g) {
            return Err(SimError::Config(format!("placement of page {vpage} is out of bounds")));
        }
        let ppn = addr.ppn(&self.g);
        if self.rev.contains_key(&ppn) {
            return Err(SimError::Config(format!("placement of page {vpage} collides with another page")));
        }
        let chip = addr.chip_id(&self.g);
        let pi = self.g.plane_index(chip, addr.die, addr.plane);
        let di = self.g.die_index(chip, addr.die);
        let bid = addr.block_id(&self.g);
        if !self.blocks.contains_key(&bid) {
            let pa = &mut self.planes[pi];
            if addr.block >= pa.fresh_next {
                for b in pa.fresh_next..addr.block {
                    pa.free.push_back(b);
                }
                pa.fresh_next = addr.block + 1;
            } else if let Some(pos) = pa.free.iter().position(|&b| b == addr.block) {
                pa.free.remove(pos);
            }
            self.die_free[di] -= 1;
        }
        let ppb = self.g.pages_per_block;
        let info = self.blocks.entry(bid).or_default();
        let was_full = info.next_page == ppb;
        info.next_page = info.next_page.max(addr.page + 1);
        if !was_full && info.next_page == ppb {
            let valid = info.valid;
            self.full[di].insert((valid, bid));
        }
        if let Some(old) = self.fwd.insert(vpage, ppn) {
            self.invalidate(old);
        }
        self.rev.insert(ppn, vpage);
        self.add_valid(ppn, 1);
        Ok(())
    }

    /// Reclaims the greedy victim on one die. Mapping changes take effect
    /// immediately; the caller models the flash traffic.
    pub fn run_gc(&mut self, chip: ChipId, die: u32) -> Result<MigrationReport> {
        let di = self.g.die_index(chip, die);
        let ppb = self.g.pages_per_block;
        let Some(&(valid, bid)) = self.full[di].first() else {
            return Err(SimError::CapacityExhausted { chip, die });
        };
        if valid == ppb {
            return Err(SimError::CapacityExhausted { chip, die });
        }
        self.full[di].remove(&(valid, bid));
        let victim = PhysicalAddress::from_ppn(bid * ppb as u64, &self.g);
        let mut migrations = Vec::with_capacity(valid as usize);
        for page in 0..ppb {
            let old = bid * ppb as u64 + page as u64;
            let Some(&vpage) = self.rev.get(&old) else { continue };
            let m = self.g.planes_per_die;
            let plane = self.gc_rr[di] % m;
            self.gc_rr[di] = (self.gc_rr[di] + 1) % m;
            let new = self.alloc_in_die(chip, die, plane)?;
            self.rev.remove(&old);
            self.blocks.get_mut(&bid).expect("victim tracked").valid -= 1;
            self.fwd.insert(vpage, new);
            self.rev.insert(new, vpage);
            self.add_valid(new, 1);
            migrations.push(Migration {
                vpage,
                old: PhysicalAddress::from_ppn(old, &self.g),
                new: PhysicalAddress::from_ppn(new, &self.g),
            });
        }
        self.blocks.remove(&bid);
        let pi = self.g.plane_index(chip, victim.die, victim.plane);
        self.planes[pi].free.push_back(victim.block);
        self.die_free[di] += 1;
        let report = MigrationReport { chip, die, victim, migrations };
        self.stats.gc_runs += 1;
        self.stats.gc_migrations += report.migrations.len() as u64;
        self.stats.gc_notifications += report.notifications().count() as u64;
        Ok(report)
    }

    /// Runs GC on `(chip, die)` until it is back above the threshold.
    pub fn collect(&mut self, chip: ChipId, die: u32) -> Result<Vec<MigrationReport>> {
        let mut out = Vec::new();
        while self.needs_gc(chip, die) {
            out.push(self.run_gc(chip, die)?);
        }
        Ok(out)
    }

    /// Writes `vpage` and collects on its die as needed, discarding the
    /// migration reports. Used for untimed setup.
    fn write_untimed(&mut self, vpage: u64) -> Result<()> {
        let addr = self.write(vpage)?;
        let chip = addr.chip_id(&self.g);
        self.collect(chip, addr.die)?;
        Ok(())
    }

    /// Untimed fill with aligned random writes of `precondition_io_bytes`
    /// until the configured fraction of the exported space holds data.
    pub fn precondition(&mut self) -> Result<()> {
        let fill = self.cfg.precondition_fill;
        if fill <= 0.0 {
            return Ok(());
        }
        let target = (fill * self.exported as f64).floor() as u64;
        let io_pages = (self.cfg.precondition_io_bytes / self.g.page_size as u64).max(1);
        let slots = (self.exported / io_pages).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.precondition_seed);
        let budget = 64 * (target / io_pages + 1);
        let mut n = 0;
        while self.mapped_pages() < target && n < budget {
            let start = rng.random_range(0..slots) * io_pages;
            for v in start..(start + io_pages).min(self.exported) {
                self.write_untimed(v)?;
            }
            n += 1;
        }
        Ok(())
    }

    /// Untimed writes of every unmapped page in `vpages`, in ascending order.
    pub fn prefill<I: IntoIterator<Item = u64>>(&mut self, vpages: I) -> Result<()> {
        let mut pages: Vec<u64> = vpages.into_iter().filter(|v| !self.fwd.contains_key(v)).collect();
        pages.sort_unstable();
        pages.dedup();
        for v in pages {
            self.write_untimed(v)?;
        }
        Ok(())
    }

    /// Full consistency check of the mapping state.
    pub fn audit(&self) -> std::result::Result<(), String> {
        if self.fwd.len() != self.rev.len() {
            return Err(format!("forward {} vs reverse {} entries", self.fwd.len(), self.rev.len()));
        }
        for (&v, &p) in &self.fwd {
            if self.rev.get(&p) != Some(&v) {
                return Err(format!("vpage {v} -> ppn {p} has no matching reverse entry"));
            }
        }
        let ppb = self.g.pages_per_block as u64;
        let mut counts: HashMap<u64, u32> = HashMap::new();
        for &p in self.rev.keys() {
            *counts.entry(p / ppb).or_default() += 1;
            let info = self.blocks.get(&(p / ppb)).ok_or(format!("ppn {p} in untracked block"))?;
            if (p % ppb) as u32 >= info.next_page {
                return Err(format!("ppn {p} is valid but beyond the write pointer"));
            }
        }
        for (&bid, info) in &self.blocks {
            let c = counts.get(&bid).copied().unwrap_or(0);
            if c != info.valid {
                return Err(format!("block {bid} counts {} valid, holds {c}", info.valid));
            }
        }
        for (di, set) in self.full.iter().enumerate() {
            for &(valid, bid) in set {
                if self.die_of_block(bid) != di || self.blocks.get(&bid).map(|b| b.valid) != Some(valid) {
                    return Err(format!("stale victim index entry for block {bid}"));
                }
            }
        }
        Ok(())
    }
}
