use std::collections::HashSet;

use super::pool::MemId;
use super::{Policy, PolicyKind, StepCtx};

/// Strict arrival order. The head tag commits whole once none of its chips
/// has outstanding work; otherwise nothing behind it moves.
pub struct Vas;

pub fn vas_step(ctx: &StepCtx) -> Vec<MemId> {
    let mut busy: HashSet<usize> = HashSet::new();
    let mut out = Vec::new();
    for (_, tag) in ctx.pool.tags() {
        let entries = ctx.pool.tag_entries(tag);
        if entries.iter().any(|e| ctx.chips[e.chip].busy() || busy.contains(&e.chip)) {
            break;
        }
        for e in entries {
            busy.insert(e.chip);
            out.push(e.mem);
        }
    }
    out
}

impl Policy for Vas {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Vas
    }

    fn step(&mut self, ctx: &StepCtx) -> Vec<MemId> {
        vas_step(ctx)
    }
}
