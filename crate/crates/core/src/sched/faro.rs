//! FLP-aware over-commitment: pick the pending requests of one chip that
//! form the deepest legal transaction, preferring requests of one I/O.

use std::collections::BTreeMap;

use super::pool::{Entry, MemId, TagId};
use crate::flash::{Geometry, OpKind};

/// Ranking key of a coalition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaroPriority {
    pub overlap_depth: usize,
    pub connectivity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalition {
    pub kind: OpKind,
    pub priority: FaroPriority,
    /// Tag whose requests the coalition favours.
    pub anchor: TagId,
    /// Die-major, plane-minor order.
    pub members: Vec<MemId>,
}

/// Entries of one kind grouped as die -> page offset -> plane -> entries
/// (oldest first).
type Groups<'a> = BTreeMap<u32, BTreeMap<u32, BTreeMap<u32, Vec<&'a Entry>>>>;

fn group<'a>(entries: &[&'a Entry]) -> Groups<'a> {
    let mut g: Groups<'a> = BTreeMap::new();
    for e in entries {
        g.entry(e.addr.die)
            .or_default()
            .entry(e.addr.page)
            .or_default()
            .entry(e.addr.plane)
            .or_default()
            .push(e);
    }
    for dies in g.values_mut() {
        for pages in dies.values_mut() {
            for v in pages.values_mut() {
                v.sort_by_key(|e| e.seq);
            }
        }
    }
    g
}

fn die_max(pages: &BTreeMap<u32, BTreeMap<u32, Vec<&Entry>>>) -> usize {
    pages.values().map(|p| p.len()).max().unwrap_or(0)
}

fn planes_with(tag: TagId, planes: &BTreeMap<u32, Vec<&Entry>>) -> usize {
    planes.values().filter(|v| v.iter().any(|e| e.tag == tag)).count()
}

fn oldest(planes: &BTreeMap<u32, Vec<&Entry>>) -> u64 {
    planes.values().flat_map(|v| v.iter().map(|e| e.seq)).min().unwrap_or(u64::MAX)
}

struct Candidate<'a> {
    kind: OpKind,
    depth: usize,
    conn: usize,
    anchor: TagId,
    groups: Groups<'a>,
}

fn candidate<'a>(kind: OpKind, entries: &[&'a Entry]) -> Option<Candidate<'a>> {
    if entries.is_empty() {
        return None;
    }
    let groups = group(entries);
    let depth: usize = groups.values().map(die_max).sum();
    let mut tags: Vec<TagId> = entries.iter().map(|e| e.tag).collect();
    tags.sort_unstable();
    tags.dedup();
    let mut best: Option<(usize, TagId)> = None;
    for &t in &tags {
        let conn: usize = groups
            .values()
            .map(|pages| {
                let m = die_max(pages);
                pages.values().filter(|p| p.len() == m).map(|p| planes_with(t, p)).max().unwrap_or(0)
            })
            .sum();
        if best.is_none_or(|(c, _)| conn > c) {
            best = Some((conn, t));
        }
    }
    let (conn, anchor) = best?;
    Some(Candidate { kind, depth, conn, anchor, groups })
}

fn build(c: &Candidate) -> Vec<MemId> {
    let mut out = Vec::with_capacity(c.depth);
    for pages in c.groups.values() {
        let m = die_max(pages);
        let chosen = pages
            .values()
            .filter(|p| p.len() == m)
            .min_by_key(|p| (std::cmp::Reverse(planes_with(c.anchor, p)), oldest(p)))
            .expect("die has a maximal group");
        for list in chosen.values() {
            let pick = list.iter().find(|e| e.tag == c.anchor).unwrap_or(&list[0]);
            out.push(pick.mem);
        }
    }
    out
}

/// Highest-priority coalition among `entries` (all targeting one chip):
/// largest overlap depth, then connectivity, then oldest anchor tag, reads
/// before programs.
pub fn faro_best(entries: &[Entry]) -> Option<Coalition> {
    let mut best: Option<Candidate> = None;
    for kind in [OpKind::Read, OpKind::Program, OpKind::Erase] {
        let of_kind: Vec<&Entry> = entries.iter().filter(|e| e.kind == kind).collect();
        let Some(c) = candidate(kind, &of_kind) else { continue };
        let c = if kind == OpKind::Erase { Candidate { depth: 1, conn: 1, ..c } } else { c };
        let better = match &best {
            None => true,
            Some(b) => (c.depth, c.conn, std::cmp::Reverse(c.anchor)) > (b.depth, b.conn, std::cmp::Reverse(b.anchor)),
        };
        if better {
            best = Some(c);
        }
    }
    let c = best?;
    let members = if c.kind == OpKind::Erase {
        let e = entries.iter().filter(|e| e.kind == OpKind::Erase).min_by_key(|e| e.seq)?;
        vec![e.mem]
    } else {
        build(&c)
    };
    Some(Coalition {
        kind: c.kind,
        priority: FaroPriority { overlap_depth: c.depth, connectivity: c.conn },
        anchor: c.anchor,
        members,
    })
}

/// Repeatedly commits the best coalition while it fits in `budget`
/// requests. Returns memory requests in commit order.
pub fn faro_select(entries: &[Entry], budget: usize) -> Vec<MemId> {
    let mut left: Vec<Entry> = entries.to_vec();
    let mut out = Vec::new();
    let mut budget = budget;
    while let Some(c) = faro_best(&left) {
        if c.members.len() > budget {
            break;
        }
        budget -= c.members.len();
        left.retain(|e| !c.members.contains(&e.mem));
        out.extend(c.members);
    }
    out
}

/// Overlap depth of each entry: the size of the largest legal coalition
/// that contains it.
pub fn overlap_depths(entries: &[Entry]) -> Vec<(MemId, usize)> {
    let mut out = Vec::with_capacity(entries.len());
    for kind in [OpKind::Read, OpKind::Program, OpKind::Erase] {
        let of_kind: Vec<&Entry> = entries.iter().filter(|e| e.kind == kind).collect();
        if kind == OpKind::Erase {
            out.extend(of_kind.iter().map(|e| (e.mem, 1)));
            continue;
        }
        let groups = group(&of_kind);
        let total: usize = groups.values().map(die_max).sum();
        for e in &of_kind {
            let pages = &groups[&e.addr.die];
            let own = pages[&e.addr.page].len();
            out.push((e.mem, total - die_max(pages) + own));
        }
    }
    out
}

/// Reference search over every subset of `entries` (keep it small):
/// returns (largest legal coalition size, most requests of one tag within
/// any largest coalition).
pub fn brute_force_best(entries: &[Entry], g: &Geometry) -> (usize, usize) {
    assert!(entries.len() <= 20, "brute force is exponential");
    let n = entries.len();
    let mut best = (0, 0);
    for mask in 1u32..(1u32 << n) {
        let members: Vec<(OpKind, crate::flash::PhysicalAddress)> =
            (0..n).filter(|i| mask & (1 << i) != 0).map(|i| (entries[i].kind, entries[i].addr)).collect();
        if !crate::flash::txn_legal(&members, g) {
            continue;
        }
        let mut per_tag: BTreeMap<TagId, usize> = BTreeMap::new();
        for i in (0..n).filter(|i| mask & (1 << i) != 0) {
            *per_tag.entry(entries[i].tag).or_default() += 1;
        }
        let conn = per_tag.values().copied().max().unwrap_or(0);
        best = best.max((members.len(), conn));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flash::PhysicalAddress;

    fn e(mem: MemId, tag: TagId, die: u32, plane: u32, page: u32) -> Entry {
        Entry {
            mem,
            tag,
            seq: mem as u64,
            kind: OpKind::Read,
            vpage: mem as u64,
            addr: PhysicalAddress { channel: 0, chip: 0, die, plane, block: plane, page },
            chip: 0,
        }
    }

    #[test]
    fn singleton() {
        let c = faro_best(&[e(0, 0, 0, 0, 0)]).unwrap();
        assert_eq!(c.priority, FaroPriority { overlap_depth: 1, connectivity: 1 });
        assert_eq!(c.members, vec![0]);
    }

    #[test]
    fn depth_four_over_two_dies_two_planes() {
        let b = [e(0, 0, 0, 0, 5), e(1, 1, 0, 1, 5), e(2, 2, 1, 0, 2), e(3, 3, 1, 1, 2), e(4, 4, 0, 2, 9)];
        let c = faro_best(&b).unwrap();
        assert_eq!(c.priority.overlap_depth, 4);
        assert_eq!(c.members, vec![0, 1, 2, 3]);
    }

    #[test]
    fn connectivity_breaks_depth_ties() {
        // Two depth-2 options on die 0: pages 1 (tags 1 and 5) and 4 (both tag 3).
        let b = [e(0, 1, 0, 0, 1), e(1, 5, 0, 1, 1), e(2, 3, 0, 0, 4), e(3, 3, 0, 1, 4)];
        let c = faro_best(&b).unwrap();
        assert_eq!(c.priority, FaroPriority { overlap_depth: 2, connectivity: 2 });
        assert_eq!(c.anchor, 3);
        assert_eq!(c.members, vec![2, 3]);
    }

    #[test]
    fn reads_before_programs_on_full_tie() {
        let mut w = e(1, 0, 1, 0, 0);
        w.kind = OpKind::Program;
        let c = faro_best(&[w, e(0, 0, 0, 0, 0)]).unwrap();
        assert_eq!(c.kind, OpKind::Read);
    }

    #[test]
    fn select_respects_budget() {
        let b = [e(0, 0, 0, 0, 0), e(1, 0, 0, 1, 0), e(2, 1, 0, 0, 3)];
        assert_eq!(faro_select(&b, 8), vec![0, 1, 2]);
        assert_eq!(faro_select(&b, 2), vec![0, 1]);
        assert!(faro_select(&b, 1).is_empty());
    }

    #[test]
    fn overlap_depth_per_entry() {
        let b = [e(0, 0, 0, 0, 0), e(1, 0, 0, 1, 0), e(2, 1, 0, 0, 3), e(3, 2, 1, 2, 7)];
        let d: BTreeMap<_, _> = overlap_depths(&b).into_iter().collect();
        assert_eq!(d[&0], 3);
        assert_eq!(d[&2], 2);
        assert_eq!(d[&3], 3);
    }

    #[test]
    fn matches_brute_force_on_example() {
        let g = Geometry::default();
        let b = [e(0, 1, 0, 0, 1), e(1, 5, 0, 1, 1), e(2, 3, 0, 0, 4), e(3, 3, 0, 1, 4), e(4, 2, 1, 3, 0)];
        let c = faro_best(&b).unwrap();
        assert_eq!(brute_force_best(&b, &g), (c.priority.overlap_depth, c.priority.connectivity));
    }
}
