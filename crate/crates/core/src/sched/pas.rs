use std::collections::HashSet;

use super::hazard::Hazards;
use super::pool::MemId;
use super::vas::vas_step;
use super::{Policy, PolicyKind, StepCtx};

/// Arrival-order scan that skips tags colliding with busy chips or with
/// tags chosen earlier in the same step. Tags commit whole; requests of
/// different tags never share a chip while one is in flight.
pub struct Pas;

pub fn pas_step(ctx: &StepCtx) -> Vec<MemId> {
    if ctx.fua_active {
        return vas_step(ctx);
    }
    let mut claimed: HashSet<usize> = HashSet::new();
    let mut hz = Hazards::new();
    let mut out = Vec::new();
    for (_, tag) in ctx.pool.tags() {
        let free = tag.mems().all(|m| {
            let e = ctx.pool.entry(m).expect("pooled");
            !ctx.chips[e.chip].busy() && !claimed.contains(&e.chip)
        });
        if !free || tag.mems().any(|m| hz.blocked(ctx.pool, ctx.pool.entry(m).expect("pooled"))) {
            continue;
        }
        for m in tag.mems() {
            claimed.insert(ctx.pool.entry(m).expect("pooled").chip);
            hz.take(m);
            out.push(m);
        }
    }
    out
}

impl Policy for Pas {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Pas
    }

    fn step(&mut self, ctx: &StepCtx) -> Vec<MemId> {
        pas_step(ctx)
    }
}
