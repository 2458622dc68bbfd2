use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::geometry::{ChipId, Geometry, OpKind, PhysicalAddress};
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlpClass {
    #[serde(rename = "NON_PAL")]
    NonPal,
    #[serde(rename = "PAL1")]
    Pal1,
    #[serde(rename = "PAL2")]
    Pal2,
    #[serde(rename = "PAL3")]
    Pal3,
}

impl FlpClass {
    pub const ALL: [FlpClass; 4] = [FlpClass::NonPal, FlpClass::Pal1, FlpClass::Pal2, FlpClass::Pal3];

    pub fn index(self) -> usize {
        self as usize
    }
}

fn same_chip(reqs: &[PhysicalAddress]) -> Result<()> {
    match reqs.split_first() {
        Some((first, rest)) => {
            if rest.iter().any(|a| a.channel != first.channel || a.chip != first.chip) {
                Err(SimError::MultiChip)
            } else {
                Ok(())
            }
        }
        None => Ok(()),
    }
}

/// Whether `reqs` may share one multi-plane operation on a single die:
/// identical page offset, pairwise-distinct planes, at most `planes_per_die`
/// members. Requests on different dies never form one plane-sharing group,
/// so such input yields `false`.
pub fn check_plane_share_legal(reqs: &[PhysicalAddress], g: &Geometry) -> Result<bool> {
    same_chip(reqs)?;
    let Some(first) = reqs.first() else { return Ok(true) };
    if reqs.len() > g.planes_per_die as usize {
        return Ok(false);
    }
    let mut planes = 0u64;
    for a in reqs {
        if a.die != first.die || a.page != first.page {
            return Ok(false);
        }
        let bit = 1u64 << a.plane;
        if planes & bit != 0 {
            return Ok(false);
        }
        planes |= bit;
    }
    Ok(true)
}

pub fn classify_flp(members: &[PhysicalAddress], g: &Geometry) -> Result<FlpClass> {
    same_chip(members)?;
    let mut by_die: BTreeMap<u32, Vec<PhysicalAddress>> = BTreeMap::new();
    for a in members {
        by_die.entry(a.die).or_default().push(*a);
    }
    for (die, group) in &by_die {
        if group.len() > 1 && !check_plane_share_legal(group, g)? {
            return Err(SimError::IllegalGroup { die: *die });
        }
    }
    Ok(if members.len() <= 1 {
        FlpClass::NonPal
    } else if by_die.len() == 1 {
        FlpClass::Pal1
    } else if by_die.values().all(|v| v.len() == 1) {
        FlpClass::Pal2
    } else {
        FlpClass::Pal3
    })
}

/// Incremental legality tracker for one forming transaction.
#[derive(Debug, Clone)]
pub struct TxnShape {
    chip: Option<ChipId>,
    kind: Option<OpKind>,
    dies: Vec<Option<(u32, u64)>>,
    len: usize,
    cap: usize,
}

impl TxnShape {
    pub fn new(g: &Geometry) -> Self {
        TxnShape {
            chip: None,
            kind: None,
            dies: vec![None; g.dies_per_chip as usize],
            len: 0,
            cap: g.max_txn(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn kind(&self) -> Option<OpKind> {
        self.kind
    }

    pub fn can_add(&self, kind: OpKind, a: &PhysicalAddress, g: &Geometry) -> bool {
        if self.len == 0 {
            return true;
        }
        if self.len >= self.cap || self.kind != Some(kind) || kind == OpKind::Erase {
            return false;
        }
        if self.chip != Some(a.chip_id(g)) {
            return false;
        }
        match self.dies[a.die as usize] {
            None => true,
            Some((page, planes)) => page == a.page && planes & (1u64 << a.plane) == 0,
        }
    }

    /// Adds without checking; callers test [`TxnShape::can_add`] first.
    pub fn add(&mut self, kind: OpKind, a: &PhysicalAddress, g: &Geometry) {
        debug_assert!(self.can_add(kind, a, g));
        self.chip = Some(a.chip_id(g));
        self.kind = Some(kind);
        let slot = &mut self.dies[a.die as usize];
        let planes = slot.map(|(_, p)| p).unwrap_or(0);
        *slot = Some((a.page, planes | (1u64 << a.plane)));
        self.len += 1;
    }
}

/// Full legality check for a candidate transaction.
pub fn txn_legal(members: &[(OpKind, PhysicalAddress)], g: &Geometry) -> bool {
    let mut shape = TxnShape::new(g);
    for (k, a) in members {
        if !shape.can_add(*k, a, g) {
            return false;
        }
        shape.add(*k, a, g);
    }
    true
}
