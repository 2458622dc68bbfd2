use std::collections::HashSet;

use super::pool::{Entry, MemId, PendingPool};
use crate::flash::OpKind;

/// Tracks what one policy step has already committed, so a write becomes
/// eligible once every older read of its page is ahead of it.
#[derive(Debug, Default)]
pub struct Hazards {
    taken: HashSet<MemId>,
}

impl Hazards {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn blocked(&self, pool: &PendingPool, e: &Entry) -> bool {
        e.kind == OpKind::Program && pool.older_read_pending(e, &self.taken)
    }

    pub fn take(&mut self, mem: MemId) {
        self.taken.insert(mem);
    }

    pub fn take_all(&mut self, mems: &[MemId]) {
        self.taken.extend(mems.iter().copied());
    }
}

/// Drops from `batch` every write whose older same-page read is neither in
/// the batch ahead of it nor already committed. Reads are never held back:
/// the host buffer resolves read-after-write and write-after-write.
pub fn hazard_filter(batch: &[MemId], pool: &PendingPool) -> Vec<MemId> {
    let mut h = Hazards::new();
    let mut out = Vec::with_capacity(batch.len());
    for &m in batch {
        let Some(e) = pool.entry(m) else { continue };
        if h.blocked(pool, e) {
            continue;
        }
        h.take(m);
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flash::{Geometry, PhysicalAddress};

    fn entry(mem: MemId, kind: OpKind, vpage: u64, plane: u32) -> Entry {
        Entry {
            mem,
            tag: mem as u64,
            seq: mem as u64,
            kind,
            vpage,
            addr: PhysicalAddress { channel: 0, chip: 0, die: 0, plane, block: 0, page: 0 },
            chip: 0,
        }
    }

    #[test]
    fn write_waits_for_older_read() {
        let g = Geometry::default();
        let mut p = PendingPool::new(&g);
        p.insert(entry(0, OpKind::Read, 9, 0), false);
        p.insert(entry(1, OpKind::Program, 9, 1), false);
        assert_eq!(hazard_filter(&[1, 0], &p), vec![0]);
        assert_eq!(hazard_filter(&[0, 1], &p), vec![0, 1]);
    }

    #[test]
    fn disjoint_targets_unchanged() {
        let g = Geometry::default();
        let mut p = PendingPool::new(&g);
        p.insert(entry(0, OpKind::Read, 9, 0), false);
        p.insert(entry(1, OpKind::Program, 10, 1), false);
        assert_eq!(hazard_filter(&[1, 0], &p), vec![1, 0]);
    }
}
