//! Sprinkler variants: SPK3 combines resource-driven traversal with FARO
//! over-commitment; SPK2 keeps the traversal only; SPK1 keeps FARO only.

use std::collections::HashMap;

use super::faro::faro_select;
use super::hazard::Hazards;
use super::pool::{Entry, MemId};
use super::vas::vas_step;
use super::{Policy, PolicyKind, StepCtx};
use crate::flash::TxnShape;

pub struct Spk1;
pub struct Spk2;
pub struct Spk3;

fn budget(ctx: &StepCtx, chip: usize) -> usize {
    ctx.geometry.max_txn().saturating_sub(ctx.chips[chip].waiting as usize)
}

fn eligible(ctx: &StepCtx, hz: &Hazards, entries: impl Iterator<Item = Entry>) -> Vec<Entry> {
    entries.filter(|e| !hz.blocked(ctx.pool, e)).collect()
}

pub fn spk3_step(ctx: &StepCtx) -> Vec<MemId> {
    if ctx.fua_active {
        return vas_step(ctx);
    }
    let mut hz = Hazards::new();
    let mut out = Vec::new();
    for chip in ctx.pool.nonempty_chips() {
        let b = budget(ctx, chip);
        if b == 0 {
            continue;
        }
        let entries = eligible(ctx, &hz, ctx.pool.bucket(chip).copied());
        let sel = faro_select(&entries, b);
        hz.take_all(&sel);
        out.extend(sel);
    }
    out
}

pub fn spk2_step(ctx: &StepCtx) -> Vec<MemId> {
    if ctx.fua_active {
        return vas_step(ctx);
    }
    let g = ctx.geometry;
    let mut hz = Hazards::new();
    let mut out = Vec::new();
    for chip in ctx.pool.nonempty_chips() {
        if ctx.chips[chip].waiting > 0 {
            continue;
        }
        let mut shape = TxnShape::new(g);
        for e in ctx.pool.bucket(chip) {
            let blocked = hz.blocked(ctx.pool, e);
            if shape.is_empty() {
                if blocked {
                    continue;
                }
            } else if blocked || !shape.can_add(e.kind, &e.addr, g) {
                break;
            }
            shape.add(e.kind, &e.addr, g);
            hz.take(e.mem);
            out.push(e.mem);
        }
    }
    out
}

pub fn spk1_step(ctx: &StepCtx) -> Vec<MemId> {
    if ctx.fua_active {
        return vas_step(ctx);
    }
    let mut composed: Vec<Entry> = Vec::new();
    for (_, tag) in ctx.pool.tags() {
        let entries = ctx.pool.tag_entries(tag);
        if entries.iter().any(|e| ctx.chips[e.chip].busy()) {
            break;
        }
        composed.extend(entries);
    }
    let mut order: Vec<usize> = Vec::new();
    let mut per_chip: HashMap<usize, Vec<Entry>> = HashMap::new();
    for e in composed {
        per_chip
            .entry(e.chip)
            .or_insert_with(|| {
                order.push(e.chip);
                Vec::new()
            })
            .push(e);
    }
    let mut hz = Hazards::new();
    let mut out = Vec::new();
    for chip in order {
        let entries = eligible(ctx, &hz, per_chip[&chip].iter().copied());
        let sel = faro_select(&entries, budget(ctx, chip));
        hz.take_all(&sel);
        out.extend(sel);
    }
    out
}

impl Policy for Spk1 {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Spk1
    }

    fn step(&mut self, ctx: &StepCtx) -> Vec<MemId> {
        spk1_step(ctx)
    }
}

impl Policy for Spk2 {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Spk2
    }

    fn step(&mut self, ctx: &StepCtx) -> Vec<MemId> {
        spk2_step(ctx)
    }
}

impl Policy for Spk3 {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Spk3
    }

    fn step(&mut self, ctx: &StepCtx) -> Vec<MemId> {
        spk3_step(ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flash::OpKind::{Program, Read};
    use crate::sched::testutil::*;
    use crate::sched::ChipStatus;

    #[test]
    fn spk3_commits_to_busy_chip_within_budget() {
        let g = geometry();
        let p = pool(&g, &[(0, Read, 0, 0, 0, 0, 0), (1, Read, 0, 0, 1, 0, 1), (2, Read, 0, 1, 0, 3, 2)], &[]);
        let mut s = busy(&g, &[0]);
        s[0].waiting = 1;
        // Budget 4 - 1 = 3.
        assert_eq!(step(spk3_step, &g, &p, &s, false).len(), 3);
        s[0].waiting = 4;
        assert!(step(spk3_step, &g, &p, &s, false).is_empty());
    }

    #[test]
    fn spk3_visits_chips_by_offset() {
        let g = geometry();
        // Chip 2 is offset 1 of channel 0; chip 1 is offset 0 of channel 1.
        let p = pool(&g, &[(0, Read, 2, 0, 0, 0, 0), (1, Read, 1, 0, 0, 0, 1)], &[]);
        assert_eq!(step(spk3_step, &g, &p, &idle(&g), false), vec![1, 0]);
    }

    #[test]
    fn spk2_takes_contiguous_legal_run() {
        let g = geometry();
        let p = pool(
            &g,
            &[(0, Read, 0, 0, 0, 0, 0), (1, Read, 0, 1, 1, 5, 1), (2, Read, 0, 0, 0, 1, 2), (3, Read, 0, 0, 1, 0, 3)],
            &[],
        );
        assert_eq!(step(spk2_step, &g, &p, &idle(&g), false), vec![0, 1]);
        let mut s = idle(&g);
        s[0] = ChipStatus { outstanding: 2, waiting: 2 };
        assert!(step(spk2_step, &g, &p, &s, false).is_empty());
    }

    #[test]
    fn spk1_composes_until_busy_chip() {
        let g = geometry();
        let p = pool(&g, &[(0, Read, 0, 0, 0, 0, 0), (1, Read, 1, 0, 0, 0, 1), (2, Read, 0, 1, 0, 0, 2)], &[]);
        assert_eq!(step(spk1_step, &g, &p, &busy(&g, &[1]), false), vec![0]);
        let mut got = step(spk1_step, &g, &p, &idle(&g), false);
        got.sort();
        assert_eq!(got, vec![0, 1, 2]);
    }

    #[test]
    fn fua_forces_fifo_order() {
        let g = geometry();
        let p = pool(&g, &[(0, Read, 0, 0, 0, 0, 0), (1, Read, 0, 1, 0, 0, 1), (2, Read, 3, 0, 0, 0, 2)], &[1]);
        let fifo = step(vas_step, &g, &p, &idle(&g), true);
        for f in [spk1_step, spk2_step, spk3_step] {
            assert_eq!(step(f, &g, &p, &idle(&g), true), fifo);
        }
    }

    #[test]
    fn hazard_holds_write_until_read_commits() {
        let g = geometry();
        let p = pool(&g, &[(0, Read, 2, 0, 0, 0, 9), (1, Program, 1, 0, 0, 0, 9)], &[]);
        // Chip 1 is visited first; its write must not pass the older read.
        assert_eq!(step(spk3_step, &g, &p, &idle(&g), false), vec![0]);
    }
}
