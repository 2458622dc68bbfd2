use super::bus::BusState;
use super::flp::{classify_flp, txn_legal, FlpClass};
use super::geometry::{Geometry, OpKind, PhysicalAddress};
use super::timing::{Tick, Timing};
use crate::error::{Result, SimError};

/// Occupancy of one chip. `rb_busy` mirrors the ready/busy line.
#[derive(Debug, Clone, Default)]
pub struct ChipState {
    pub die_busy_until: Vec<Tick>,
    pub rb_busy: bool,
    pub busy_until: Tick,
}

impl ChipState {
    pub fn new(g: &Geometry) -> Self {
        ChipState { die_busy_until: vec![0; g.dies_per_chip as usize], rb_busy: false, busy_until: 0 }
    }

    pub fn release(&mut self) {
        self.rb_busy = false;
    }
}

/// Timeline of one executed transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxnSchedule {
    pub kind: OpKind,
    pub class: FlpClass,
    /// Formation instant; the chip is occupied from here.
    pub composed_at: Tick,
    pub bus_start: Tick,
    pub cell_start: Tick,
    pub cell_end: Tick,
    pub completed_at: Tick,
    /// Every channel grant, in grant order.
    pub bus: Vec<(Tick, Tick)>,
    /// One interval per participating die.
    pub cells: Vec<(u32, Tick, Tick)>,
    /// Per member (input order): the instant its own work finished.
    pub member_done: Vec<Tick>,
}

impl TxnSchedule {
    pub fn duration(&self) -> Tick {
        self.completed_at - self.composed_at
    }
}

fn by_die(members: &[(OpKind, PhysicalAddress)], dies: u32) -> Vec<(u32, Vec<usize>)> {
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); dies as usize];
    for (i, (_, a)) in members.iter().enumerate() {
        groups[a.die as usize].push(i);
    }
    groups.into_iter().enumerate().filter(|(_, v)| !v.is_empty()).map(|(d, v)| (d as u32, v)).collect()
}

/// Runs `members` as one transaction on an idle chip starting at `now`.
///
/// Reads issue one command slot per member, then the die senses all its
/// planes in a single cell interval, then each member moves its page out.
/// Programs move data in first, then one cell interval per die. Dies of a
/// chip overlap their cell intervals; the channel is shared with every
/// other chip on it through `bus`.
pub fn execute_transaction(
    members: &[(OpKind, PhysicalAddress)],
    chip: &mut ChipState,
    bus: &mut BusState,
    now: Tick,
    t: &Timing,
    g: &Geometry,
) -> Result<TxnSchedule> {
    if members.is_empty() {
        return Err(SimError::Config("empty transaction".into()));
    }
    let addrs: Vec<PhysicalAddress> = members.iter().map(|m| m.1).collect();
    let class = classify_flp(&addrs, g)?;
    if !txn_legal(members, g) {
        return Err(SimError::IllegalGroup { die: members[0].1.die });
    }
    assert!(!chip.rb_busy, "transaction issued to a busy chip");
    let kind = members[0].0;
    let mut grants = Vec::with_capacity(members.len() * 2);
    let mut cells = Vec::new();
    let mut done = vec![0; members.len()];
    let groups = by_die(members, g.dies_per_chip);

    match kind {
        OpKind::Read => {
            let mut cursor = now;
            for (die, idx) in &groups {
                for _ in idx {
                    let s = bus.arbitrate(cursor, t.command);
                    grants.push((s, s + t.command));
                    cursor = s + t.command;
                }
                cells.push((*die, cursor, cursor + t.read));
            }
            let mut order: Vec<usize> = (0..groups.len()).collect();
            order.sort_by_key(|&i| (cells[i].2, cells[i].0));
            let mut out = 0;
            for gi in order {
                let cell_end = cells[gi].2;
                for &m in &groups[gi].1 {
                    let s = bus.arbitrate(cell_end.max(out), t.transfer);
                    grants.push((s, s + t.transfer));
                    out = s + t.transfer;
                    done[m] = out;
                }
            }
        }
        OpKind::Program => {
            let slot = t.command + t.transfer;
            let mut cursor = now;
            for (die, idx) in &groups {
                for _ in idx {
                    let s = bus.arbitrate(cursor, slot);
                    grants.push((s, s + slot));
                    cursor = s + slot;
                }
                let page = members[idx[0]].1.page;
                let end = cursor + t.program_time(page);
                cells.push((*die, cursor, end));
                for &m in idx {
                    done[m] = end;
                }
            }
        }
        OpKind::Erase => {
            let s = bus.arbitrate(now, t.command);
            grants.push((s, s + t.command));
            let die = members[0].1.die;
            cells.push((die, s + t.command, s + t.command + t.erase));
            done[0] = s + t.command + t.erase;
        }
    }

    let bus_start = grants.iter().map(|g| g.0).min().unwrap_or(now);
    let cell_start = cells.iter().map(|c| c.1).min().unwrap_or(now);
    let cell_end = cells.iter().map(|c| c.2).max().unwrap_or(now);
    let completed_at = grants.iter().map(|g| g.1).chain(std::iter::once(cell_end)).max().unwrap_or(now);
    for &(die, _, e) in &cells {
        chip.die_busy_until[die as usize] = e;
    }
    chip.rb_busy = true;
    chip.busy_until = completed_at;
    Ok(TxnSchedule {
        kind,
        class,
        composed_at: now,
        bus_start,
        cell_start,
        cell_end,
        completed_at,
        bus: grants,
        cells,
        member_done: done,
    })
}
