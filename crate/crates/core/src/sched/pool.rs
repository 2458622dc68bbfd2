use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::flash::{ChipId, Geometry, OpKind, PhysicalAddress};

pub type MemId = usize;
pub type TagId = u64;

/// One uncommitted memory request as the scheduler sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub mem: MemId,
    pub tag: TagId,
    /// Global arrival order of memory requests.
    pub seq: u64,
    pub kind: OpKind,
    pub vpage: u64,
    pub addr: PhysicalAddress,
    pub chip: ChipId,
}

#[derive(Debug, Clone, Default)]
pub struct TagPending {
    pub fua: bool,
    mems: BTreeMap<u64, MemId>,
}

impl TagPending {
    pub fn mems(&self) -> impl Iterator<Item = MemId> + '_ {
        self.mems.values().copied()
    }

    pub fn len(&self) -> usize {
        self.mems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mems.is_empty()
    }
}

/// Uncommitted memory requests of every accepted tag, indexed both by tag
/// (arrival order) and by target chip.
#[derive(Debug, Clone)]
pub struct PendingPool {
    entries: HashMap<MemId, Entry>,
    tags: BTreeMap<TagId, TagPending>,
    buckets: Vec<BTreeMap<u64, MemId>>,
    nonempty: BTreeSet<ChipId>,
    reads: HashMap<u64, BTreeMap<u64, MemId>>,
}

impl PendingPool {
    pub fn new(g: &Geometry) -> Self {
        PendingPool {
            entries: HashMap::new(),
            tags: BTreeMap::new(),
            buckets: vec![BTreeMap::new(); g.total_chips()],
            nonempty: BTreeSet::new(),
            reads: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, e: Entry, fua: bool) {
        let t = self.tags.entry(e.tag).or_default();
        t.fua |= fua;
        t.mems.insert(e.seq, e.mem);
        self.buckets[e.chip].insert(e.seq, e.mem);
        self.nonempty.insert(e.chip);
        if e.kind == OpKind::Read {
            self.reads.entry(e.vpage).or_default().insert(e.seq, e.mem);
        }
        let prev = self.entries.insert(e.mem, e);
        debug_assert!(prev.is_none(), "memory request pooled twice");
    }

    pub fn remove(&mut self, mem: MemId) -> Option<Entry> {
        let e = self.entries.remove(&mem)?;
        if let Some(t) = self.tags.get_mut(&e.tag) {
            t.mems.remove(&e.seq);
            if t.mems.is_empty() {
                self.tags.remove(&e.tag);
            }
        }
        self.unbucket(&e);
        if e.kind == OpKind::Read {
            if let Some(r) = self.reads.get_mut(&e.vpage) {
                r.remove(&e.seq);
                if r.is_empty() {
                    self.reads.remove(&e.vpage);
                }
            }
        }
        Some(e)
    }

    fn unbucket(&mut self, e: &Entry) {
        let b = &mut self.buckets[e.chip];
        b.remove(&e.seq);
        if b.is_empty() {
            self.nonempty.remove(&e.chip);
        }
    }

    /// Moves a pending request to a new physical target.
    pub fn retarget(&mut self, mem: MemId, addr: PhysicalAddress, g: &Geometry) -> bool {
        let Some(e) = self.entries.get(&mem).copied() else { return false };
        self.unbucket(&e);
        let chip = addr.chip_id(g);
        let updated = Entry { addr, chip, ..e };
        self.buckets[chip].insert(e.seq, mem);
        self.nonempty.insert(chip);
        self.entries.insert(mem, updated);
        true
    }

    pub fn entry(&self, mem: MemId) -> Option<&Entry> {
        self.entries.get(&mem)
    }

    pub fn contains(&self, mem: MemId) -> bool {
        self.entries.contains_key(&mem)
    }

    /// Tags with uncommitted work, oldest first.
    pub fn tags(&self) -> impl Iterator<Item = (TagId, &TagPending)> + '_ {
        self.tags.iter().map(|(&t, p)| (t, p))
    }

    pub fn tag_entries(&self, t: &TagPending) -> Vec<Entry> {
        t.mems().map(|m| self.entries[&m]).collect()
    }

    /// Pending entries targeting `chip`, oldest first.
    pub fn bucket(&self, chip: ChipId) -> impl Iterator<Item = &Entry> + '_ {
        self.buckets[chip].values().map(move |m| &self.entries[m])
    }

    pub fn bucket_len(&self, chip: ChipId) -> usize {
        self.buckets[chip].len()
    }

    /// Chips with pending work in ascending index (chip-offset-major) order.
    pub fn nonempty_chips(&self) -> impl Iterator<Item = ChipId> + '_ {
        self.nonempty.iter().copied()
    }

    /// True if a read of the same page that arrived before `e` is still
    /// uncommitted and not in `taken`.
    pub fn older_read_pending(&self, e: &Entry, taken: &HashSet<MemId>) -> bool {
        self.reads
            .get(&e.vpage)
            .is_some_and(|r| r.range(..e.seq).any(|(_, m)| !taken.contains(m)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(g: &Geometry, mem: MemId, tag: TagId, kind: OpKind, vpage: u64) -> Entry {
        let (chip, die, plane) = g.stripe(vpage);
        let (channel, c) = g.chip_coords(chip);
        let addr = PhysicalAddress { channel, chip: c, die, plane, block: 0, page: 0 };
        Entry { mem, tag, seq: mem as u64, kind, vpage, addr, chip }
    }

    #[test]
    fn indexes_stay_consistent() {
        let g = Geometry::default();
        let mut p = PendingPool::new(&g);
        for i in 0..10 {
            p.insert(entry(&g, i, (i / 3) as u64, OpKind::Read, i as u64 * 8), false);
        }
        assert_eq!(p.len(), 10);
        assert_eq!(p.tags().count(), 4);
        let total: usize = (0..g.total_chips()).map(|c| p.bucket_len(c)).sum();
        assert_eq!(total, 10);
        for i in 0..10 {
            p.remove(i).unwrap();
        }
        assert!(p.is_empty());
        assert_eq!(p.nonempty_chips().count(), 0);
        assert_eq!(p.tags().count(), 0);
    }

    #[test]
    fn retarget_moves_bucket() {
        let g = Geometry::default();
        let mut p = PendingPool::new(&g);
        let e = entry(&g, 0, 0, OpKind::Read, 0);
        p.insert(e, false);
        let mut to = e.addr;
        to.channel = 3;
        p.retarget(0, to, &g);
        assert_eq!(p.bucket_len(0), 0);
        assert_eq!(p.bucket_len(3), 1);
        assert_eq!(p.entry(0).unwrap().chip, 3);
    }

    #[test]
    fn older_read_blocks_write() {
        let g = Geometry::default();
        let mut p = PendingPool::new(&g);
        let r = entry(&g, 0, 0, OpKind::Read, 9);
        let w = entry(&g, 1, 1, OpKind::Program, 9);
        p.insert(r, false);
        p.insert(w, false);
        let mut taken = HashSet::new();
        assert!(p.older_read_pending(&w, &taken));
        assert!(!p.older_read_pending(&r, &taken));
        taken.insert(0);
        assert!(!p.older_read_pending(&w, &taken));
    }
}
