//! Discrete-event core: host arrivals, device queue, policy steps, flash
//! controllers, completions and GC traffic.

pub mod bitmap;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use slab::Slab;

pub use bitmap::CompletionBitmap;

use crate::config::Config;
use crate::error::{Result, SimError};
use crate::flash::{
    execute_transaction, us_to_ticks, BusState, ChipId, ChipState, FlpClass, Geometry, OpKind, PhysicalAddress, Tick,
    Timing, TxnShape,
};
use crate::ftl::{Ftl, Migration, MigrationReport};
use crate::metrics::{self, Accum, MetricsReport};
use crate::sched::{ChipStatus, Entry, MemId, PendingPool, Policy, PolicyKind, StepCtx, TagId};
use crate::workload::{self, IoKind, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    TxnDone(ChipId),
    Window(ChipId),
    Gc(ChipId, u32),
    Arrival,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MemState {
    Pending,
    Committed,
    InTxn,
}

#[derive(Debug, Clone, Copy)]
enum GcRole {
    Read { job: usize, new: PhysicalAddress },
    Program { job: usize },
    Erase { job: usize },
}

#[derive(Debug, Clone)]
struct MemReq {
    tag: Option<TagId>,
    page: u32,
    kind: OpKind,
    vpage: u64,
    seq: u64,
    /// Where the request will execute.
    target: PhysicalAddress,
    /// Where the data currently lives.
    current: PhysicalAddress,
    state: MemState,
    gc: Option<GcRole>,
}

#[derive(Debug)]
struct TagState {
    kind: IoKind,
    fua: bool,
    accept: Tick,
    length: u64,
    bitmap: CompletionBitmap,
    done: Vec<bool>,
    done_count: usize,
    delivered: usize,
}

#[derive(Debug)]
struct GcJob {
    chip: ChipId,
    victim: PhysicalAddress,
    remaining: usize,
}

#[derive(Debug)]
struct Controller {
    waiting: VecDeque<MemId>,
    active: Vec<MemId>,
    busy: bool,
    window_pending: bool,
    form_now: bool,
    dirty: bool,
    chip: ChipState,
}

/// One policy commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitRecord {
    pub time: Tick,
    pub chip: ChipId,
    pub tag: TagId,
    pub vpage: u64,
    pub seq: u64,
}

/// One executed flash transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxnRecord {
    pub chip: ChipId,
    pub start: Tick,
    pub end: Tick,
    pub class: FlpClass,
    pub members: Vec<(OpKind, PhysicalAddress)>,
    pub seqs: Vec<u64>,
    pub tags: Vec<Option<TagId>>,
}

/// Optional event log for tests and debugging.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimTrace {
    /// Sequence numbers of host memory requests as they were created.
    pub accepted: Vec<u64>,
    pub commits: Vec<CommitRecord>,
    pub txns: Vec<TxnRecord>,
    /// Host memory requests in completion order as (seq, tag, time).
    pub completions: Vec<(u64, TagId, Tick)>,
    /// (tag, page index) in DMA delivery order.
    pub deliveries: Vec<(TagId, u32)>,
    /// (tag, retire time).
    pub retired: Vec<(TagId, Tick)>,
}

struct Host {
    records: Vec<TraceRecord>,
    ready: Vec<Tick>,
    next: usize,
    closed_loop: bool,
    scheduled: Option<Tick>,
}

impl Host {
    fn head_ready(&self, now: Tick) -> bool {
        self.next < self.records.len() && (self.closed_loop || self.ready[self.next] <= now)
    }
}

pub struct Simulator {
    cfg: Config,
    g: Geometry,
    t: Timing,
    policy: Box<dyn Policy>,
    kind: PolicyKind,
    ftl: Ftl,
    digest: String,
    now: Tick,
    events: BinaryHeap<Reverse<(Tick, u64, Event)>>,
    event_seq: u64,
    host: Host,
    tags: BTreeMap<TagId, TagState>,
    next_tag: TagId,
    fua_tags: usize,
    mems: Slab<MemReq>,
    next_seq: u64,
    pool: PendingPool,
    /// Outstanding host requests by the page number their data lives at.
    index: HashMap<u64, Vec<MemId>>,
    ctrls: Vec<Controller>,
    status: Vec<ChipStatus>,
    dirty: Vec<ChipId>,
    buses: Vec<BusState>,
    jobs: Slab<GcJob>,
    occupied: usize,
    waiting_total: usize,
    /// Something a policy can see has loosened since its last step.
    step_due: bool,
    acc: Accum,
    trace: Option<SimTrace>,
}

impl Simulator {
    /// Builds a simulator for `cfg` driving `records`. Preconditioning and
    /// read prefill happen here, untimed.
    pub fn new(cfg: &Config, records: Vec<TraceRecord>) -> Result<Simulator> {
        cfg.validate()?;
        let g = cfg.geometry.clone();
        let t = cfg.timing.ticks();
        let mut ftl = Ftl::new(&g, &cfg.ftl)?;
        ftl.precondition()?;
        let digest = workload::digest(&records);
        let ready = records.iter().map(|r| us_to_ticks(r.timestamp.max(0.0))).collect();
        let chips = g.total_chips();
        let mut sim = Simulator {
            cfg: cfg.clone(),
            g: g.clone(),
            t,
            policy: cfg.policy.name.build(),
            kind: cfg.policy.name,
            ftl,
            digest,
            now: 0,
            events: BinaryHeap::new(),
            event_seq: 0,
            host: Host { records, ready, next: 0, closed_loop: cfg.closed_loop(), scheduled: None },
            tags: BTreeMap::new(),
            next_tag: 0,
            fua_tags: 0,
            mems: Slab::new(),
            next_seq: 0,
            pool: PendingPool::new(&g),
            index: HashMap::new(),
            ctrls: (0..chips)
                .map(|_| Controller {
                    waiting: VecDeque::new(),
                    active: Vec::new(),
                    busy: false,
                    window_pending: false,
                    form_now: false,
                    dirty: false,
                    chip: ChipState::new(&g),
                })
                .collect(),
            status: vec![ChipStatus::default(); chips],
            dirty: Vec::new(),
            buses: vec![BusState::new(); g.num_channels as usize],
            jobs: Slab::new(),
            occupied: 0,
            waiting_total: 0,
            step_due: false,
            acc: Accum::new(&g),
            trace: None,
        };
        if cfg.ftl.prefill_reads {
            let reads: Vec<u64> = sim
                .host
                .records
                .iter()
                .filter(|r| r.kind == IoKind::Read)
                .flat_map(|r| sim.pages_of(r))
                .collect();
            sim.ftl.prefill(reads)?;
        }
        Ok(sim)
    }

    /// Loads the configured workload and builds a simulator for it.
    pub fn from_config(cfg: &Config) -> Result<Simulator> {
        cfg.validate()?;
        let records = cfg.load_workload()?;
        Simulator::new(cfg, records)
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(SimTrace::default());
    }

    pub fn trace(&self) -> Option<&SimTrace> {
        self.trace.as_ref()
    }

    pub fn ftl(&self) -> &Ftl {
        &self.ftl
    }

    pub fn policy(&self) -> PolicyKind {
        self.kind
    }

    pub fn workload_digest(&self) -> &str {
        &self.digest
    }

    /// Forces a GC pass on `(chip, die)` at time `at`.
    pub fn schedule_gc(&mut self, at: Tick, chip: ChipId, die: u32) {
        self.push(at, Event::Gc(chip, die));
    }

    fn push(&mut self, at: Tick, e: Event) {
        self.events.push(Reverse((at, self.event_seq, e)));
        self.event_seq += 1;
    }

    fn pages_of(&self, r: &TraceRecord) -> Vec<u64> {
        let ps = self.g.page_size as u64;
        let pages = self.ftl.exported_pages();
        let off = r.offset % (pages * ps);
        let first = off / ps;
        let last = (off + r.length.max(1) - 1) / ps;
        (first..=last).map(|p| p % pages).collect()
    }

    /// Runs to completion and returns the report.
    pub fn run(&mut self) -> Result<MetricsReport> {
        if !self.host.records.is_empty() {
            let first = if self.host.closed_loop { 0 } else { self.host.ready[0] };
            self.host.scheduled = Some(first);
            self.push(first, Event::Arrival);
        }
        while let Some(&Reverse((t, _, _))) = self.events.peek() {
            self.advance(t);
            self.now = t;
            while let Some(&Reverse((tt, _, ev))) = self.events.peek() {
                if tt != t {
                    break;
                }
                self.events.pop();
                self.handle(ev)?;
            }
            self.accept_arrivals()?;
            self.policy_step();
            self.form_dirty()?;
        }
        if !self.pool.is_empty() || !self.tags.is_empty() || self.host.next < self.host.records.len() {
            return Err(SimError::Stalled(format!(
                "at {} ns with {} pending requests and {} queued tags",
                self.now,
                self.pool.len(),
                self.tags.len()
            )));
        }
        self.acc.makespan = self.now;
        metrics::finalize(&self.acc, &self.cfg, &self.t, &self.digest, None)
    }

    fn advance(&mut self, t: Tick) {
        let dt = t - self.now;
        if dt == 0 {
            return;
        }
        if self.pool.len() + self.waiting_total > 0 {
            let idle = (self.ctrls.len() - self.occupied) as u128;
            self.acc.inter_idle += idle * dt as u128;
        }
        if self.tags.len() >= self.cfg.queue.depth && self.host.head_ready(self.now) {
            self.acc.queue_stall += dt;
        }
    }

    fn handle(&mut self, ev: Event) -> Result<()> {
        match ev {
            Event::Arrival => {
                self.host.scheduled = None;
            }
            Event::Window(chip) => {
                self.ctrls[chip].window_pending = false;
                self.ctrls[chip].form_now = true;
                self.mark(chip);
            }
            Event::TxnDone(chip) => self.complete(chip)?,
            Event::Gc(chip, die) => {
                let r = self.ftl.run_gc(chip, die)?;
                self.apply_gc(r);
            }
        }
        Ok(())
    }

    fn mark(&mut self, chip: ChipId) {
        if !self.ctrls[chip].dirty {
            self.ctrls[chip].dirty = true;
            self.dirty.push(chip);
        }
    }

    fn accept_arrivals(&mut self) -> Result<()> {
        while self.tags.len() < self.cfg.queue.depth && self.host.head_ready(self.now) {
            let r = self.host.records[self.host.next].clone();
            self.host.next += 1;
            self.accept(&r)?;
        }
        if !self.host.closed_loop && self.host.next < self.host.records.len() && self.host.scheduled.is_none() {
            let at = self.host.ready[self.host.next];
            if at > self.now {
                self.host.scheduled = Some(at);
                self.push(at, Event::Arrival);
            }
        }
        Ok(())
    }

    fn accept(&mut self, r: &TraceRecord) -> Result<()> {
        let id = self.next_tag;
        self.next_tag += 1;
        let pages = self.pages_of(r);
        let write = r.kind == IoKind::Write;
        let mut tag = TagState {
            kind: r.kind,
            fua: r.fua,
            accept: self.now,
            length: r.length,
            bitmap: CompletionBitmap::new(pages.len()),
            done: vec![false; pages.len()],
            done_count: 0,
            delivered: 0,
        };
        let mut created = Vec::with_capacity(pages.len());
        for (i, &vpage) in pages.iter().enumerate() {
            let addr = if write {
                let a = self.ftl.write(vpage)?;
                let chip = a.chip_id(&self.g);
                if self.ftl.needs_gc(chip, a.die) {
                    for rep in self.ftl.collect(chip, a.die)? {
                        self.apply_gc(rep);
                    }
                }
                Some(a)
            } else {
                self.ftl.lookup(vpage)
            };
            let Some(addr) = addr else {
                tag.done[i] = true;
                tag.done_count += 1;
                self.acc.unmapped_reads += 1;
                continue;
            };
            let seq = self.next_seq;
            self.next_seq += 1;
            let kind = if write { OpKind::Program } else { OpKind::Read };
            let m = self.mems.insert(MemReq {
                tag: Some(id),
                page: i as u32,
                kind,
                vpage,
                seq,
                target: addr,
                current: addr,
                state: MemState::Pending,
                gc: None,
            });
            self.pool.insert(
                Entry { mem: m, tag: id, seq, kind, vpage, addr, chip: addr.chip_id(&self.g) },
                r.fua,
            );
            self.index.entry(addr.ppn(&self.g)).or_default().push(m);
            self.acc.mem_requests += 1;
            created.push(seq);
        }
        if let Some(tr) = &mut self.trace {
            tr.accepted.extend(created);
        }
        if r.fua {
            self.fua_tags += 1;
        }
        self.tags.insert(id, tag);
        self.step_due = true;
        self.deliver(id);
        self.maybe_retire(id);
        Ok(())
    }

    fn policy_step(&mut self) {
        if self.pool.is_empty() || !std::mem::take(&mut self.step_due) {
            return;
        }
        let commits = {
            let ctx = StepCtx {
                pool: &self.pool,
                chips: &self.status,
                geometry: &self.g,
                fua_active: self.fua_tags > 0,
            };
            self.policy.step(&ctx)
        };
        self.step_due = !commits.is_empty();
        for m in commits {
            self.commit(m);
        }
    }

    fn commit(&mut self, m: MemId) {
        let e = self.pool.remove(m).expect("policy committed a request that is not pending");
        let mem = &mut self.mems[m];
        debug_assert_eq!(mem.state, MemState::Pending);
        mem.target = e.addr;
        let tag = mem.tag.expect("pooled requests belong to a tag");
        let (page, vpage, seq) = (mem.page, mem.vpage, mem.seq);
        self.tags.get_mut(&tag).expect("tag queued").bitmap.set(page as usize);
        if let Some(tr) = &mut self.trace {
            tr.commits.push(CommitRecord { time: self.now, chip: e.chip, tag, vpage, seq });
        }
        self.enqueue(m);
    }

    /// Hands a request to the controller of its target chip.
    fn enqueue(&mut self, m: MemId) {
        let mem = &mut self.mems[m];
        mem.state = MemState::Committed;
        let chip = mem.target.chip_id(&self.g);
        self.ctrls[chip].waiting.push_back(m);
        self.status[chip].outstanding += 1;
        self.status[chip].waiting += 1;
        self.waiting_total += 1;
        self.mark(chip);
    }

    fn form_dirty(&mut self) -> Result<()> {
        let dirty = std::mem::take(&mut self.dirty);
        for chip in dirty {
            let c = &mut self.ctrls[chip];
            c.dirty = false;
            let form_now = std::mem::take(&mut c.form_now);
            if c.busy || c.waiting.is_empty() {
                continue;
            }
            if form_now {
                self.form(chip)?;
            } else if !c.window_pending {
                c.window_pending = true;
                let at = self.now + self.t.window;
                self.push(at, Event::Window(chip));
            }
        }
        Ok(())
    }

    /// Builds a transaction greedily from the head of the controller queue.
    fn form(&mut self, chip: ChipId) -> Result<()> {
        let g = &self.g;
        let ctrl = &mut self.ctrls[chip];
        let mut shape = TxnShape::new(g);
        let mut members = Vec::new();
        let mut rest = VecDeque::with_capacity(ctrl.waiting.len());
        for m in ctrl.waiting.drain(..) {
            let mem = &self.mems[m];
            if shape.can_add(mem.kind, &mem.target, g) {
                shape.add(mem.kind, &mem.target, g);
                members.push(m);
            } else {
                rest.push_back(m);
            }
        }
        ctrl.waiting = rest;
        self.status[chip].waiting -= members.len() as u32;
        self.waiting_total -= members.len();
        self.step_due = true;
        let ops: Vec<(OpKind, PhysicalAddress)> = members.iter().map(|&m| (self.mems[m].kind, self.mems[m].target)).collect();
        let (channel, _) = g.chip_coords(chip);
        let bus = &mut self.buses[channel as usize];
        bus.prune(self.now);
        let s = execute_transaction(&ops, &mut ctrl.chip, bus, self.now, &self.t, g)?;
        self.acc.record_txn(chip, &s, g.dies_per_chip);
        if let Some(tr) = &mut self.trace {
            tr.txns.push(TxnRecord {
                chip,
                start: s.composed_at,
                end: s.completed_at,
                class: s.class,
                members: ops,
                seqs: members.iter().map(|&m| self.mems[m].seq).collect(),
                tags: members.iter().map(|&m| self.mems[m].tag).collect(),
            });
        }
        for &m in &members {
            self.mems[m].state = MemState::InTxn;
        }
        let ctrl = &mut self.ctrls[chip];
        ctrl.active = members;
        ctrl.busy = true;
        self.occupied += 1;
        self.push(s.completed_at, Event::TxnDone(chip));
        Ok(())
    }

    fn complete(&mut self, chip: ChipId) -> Result<()> {
        let ctrl = &mut self.ctrls[chip];
        let members = std::mem::take(&mut ctrl.active);
        ctrl.busy = false;
        ctrl.chip.release();
        ctrl.form_now = true;
        self.occupied -= 1;
        self.status[chip].outstanding -= members.len() as u32;
        self.step_due = true;
        self.mark(chip);
        for m in members {
            self.finish(m);
        }
        Ok(())
    }

    fn finish(&mut self, m: MemId) {
        if let Some(role) = self.mems[m].gc {
            let mem = self.mems.remove(m);
            self.finish_gc(role, &mem);
            return;
        }
        let (target, current) = (self.mems[m].target, self.mems[m].current);
        if !target.same_resource(&current) {
            self.acc.stale_replays += 1;
            self.mems[m].target = current;
            self.enqueue(m);
            return;
        }
        let mem = self.mems.remove(m);
        let ppn = mem.current.ppn(&self.g);
        if let Some(list) = self.index.get_mut(&ppn) {
            list.retain(|&x| x != m);
            if list.is_empty() {
                self.index.remove(&ppn);
            }
        }
        let id = mem.tag.expect("host request");
        let tag = self.tags.get_mut(&id).expect("tag queued");
        tag.bitmap.clear(mem.page as usize);
        tag.done[mem.page as usize] = true;
        tag.done_count += 1;
        if let Some(tr) = &mut self.trace {
            tr.completions.push((mem.seq, id, self.now));
        }
        self.deliver(id);
        self.maybe_retire(id);
    }

    /// In-order DMA: page k goes out only after pages 0..k.
    fn deliver(&mut self, id: TagId) {
        let tag = self.tags.get_mut(&id).expect("tag queued");
        if tag.kind != IoKind::Read {
            return;
        }
        while tag.delivered < tag.done.len() && tag.done[tag.delivered] {
            if let Some(tr) = &mut self.trace {
                tr.deliveries.push((id, tag.delivered as u32));
            }
            tag.delivered += 1;
        }
    }

    fn maybe_retire(&mut self, id: TagId) {
        let tag = &self.tags[&id];
        if tag.done_count < tag.done.len() || !tag.bitmap.is_empty() {
            return;
        }
        debug_assert!(tag.kind != IoKind::Read || tag.delivered == tag.done.len());
        let tag = self.tags.remove(&id).expect("tag queued");
        self.acc.latencies.push(self.now - tag.accept);
        self.acc.ios += 1;
        self.acc.bytes += tag.length;
        if tag.fua {
            self.fua_tags -= 1;
            self.step_due = true;
        }
        if let Some(tr) = &mut self.trace {
            tr.retired.push((id, self.now));
        }
    }

    fn gc_mem(&mut self, kind: OpKind, addr: PhysicalAddress, vpage: u64, role: GcRole) -> MemId {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.mems.insert(MemReq {
            tag: None,
            page: 0,
            kind,
            vpage,
            seq,
            target: addr,
            current: addr,
            state: MemState::Committed,
            gc: Some(role),
        })
    }

    fn apply_gc(&mut self, r: MigrationReport) {
        self.acc.gc_runs += 1;
        self.acc.gc_migrations += r.migrations.len() as u64;
        let job = self.jobs.insert(GcJob { chip: r.chip, victim: r.victim, remaining: r.migrations.len() });
        for mig in &r.migrations {
            self.migrate(mig);
            let m = self.gc_mem(OpKind::Read, mig.old, mig.vpage, GcRole::Read { job, new: mig.new });
            self.enqueue(m);
        }
        if r.migrations.is_empty() {
            let m = self.gc_mem(OpKind::Erase, r.victim, 0, GcRole::Erase { job });
            self.enqueue(m);
        }
    }

    /// Points outstanding host requests at the page's new home. Pending
    /// requests follow it when the policy listens for readdressing (or when
    /// the move stays on the same plane); otherwise they go stale.
    fn migrate(&mut self, mig: &Migration) {
        let old = mig.old.ppn(&self.g);
        let Some(list) = self.index.remove(&old) else { return };
        let crossing = mig.crosses_resource();
        for &m in &list {
            let mem = &mut self.mems[m];
            mem.current = mig.new;
            if mem.state == MemState::Pending && (!crossing || self.kind.readdressing()) {
                mem.target = mig.new;
                self.pool.retarget(m, mig.new, &self.g);
                self.step_due = true;
                if crossing {
                    self.acc.readdress_notifications += 1;
                }
            }
        }
        self.index.entry(mig.new.ppn(&self.g)).or_default().extend(list);
    }

    fn finish_gc(&mut self, role: GcRole, mem: &MemReq) {
        match role {
            GcRole::Read { job, new } => {
                let m = self.gc_mem(OpKind::Program, new, mem.vpage, GcRole::Program { job });
                self.enqueue(m);
            }
            GcRole::Program { job } => {
                let j = &mut self.jobs[job];
                j.remaining -= 1;
                if j.remaining == 0 {
                    let victim = j.victim;
                    debug_assert_eq!(victim.chip_id(&self.g), j.chip);
                    let m = self.gc_mem(OpKind::Erase, victim, 0, GcRole::Erase { job });
                    self.enqueue(m);
                }
            }
            GcRole::Erase { job } => {
                self.jobs.remove(job);
                self.acc.gc_erases += 1;
            }
        }
    }
}

/// Loads the workload named by `cfg`, runs it, and compares against
/// `baseline` when given.
pub fn simulate(cfg: &Config, baseline: Option<&MetricsReport>) -> Result<MetricsReport> {
    let mut sim = Simulator::from_config(cfg)?;
    let mut report = sim.run()?;
    if let Some(b) = baseline {
        report.compare_to(b)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ArrivalMode, WorkloadSource};

    fn rec(t: f64, kind: IoKind, offset: u64, length: u64) -> TraceRecord {
        TraceRecord { timestamp: t, kind, offset, length, fua: false }
    }

    fn cfg() -> Config {
        let mut c = Config::default();
        c.geometry.blocks_per_die = 64;
        c.geometry.pages_per_block = 32;
        c.workload.source = WorkloadSource::Inline;
        c
    }

    #[test]
    fn empty_workload_is_vacuous() {
        let mut s = Simulator::new(&cfg(), vec![]).unwrap();
        let r = s.run().unwrap();
        assert_eq!(r.makespan_us, 0.0);
        assert_eq!(r.ios, 0);
        assert_eq!(r.txn_count, 0);
    }

    #[test]
    fn single_read_latency() {
        let mut s = Simulator::new(&cfg(), vec![rec(0.0, IoKind::Read, 0, 2048)]).unwrap();
        let r = s.run().unwrap();
        assert_eq!(r.latency_mean_us, 1.0 + 0.2 + 20.0 + 12.3);
        assert_eq!(r.txn_count, 1);
    }

    #[test]
    fn single_write_retires_on_program_end() {
        let mut s = Simulator::new(&cfg(), vec![rec(0.0, IoKind::Write, 0, 2048)]).unwrap();
        let r = s.run().unwrap();
        assert_eq!(r.latency_mean_us, 1.0 + 0.2 + 12.3 + 200.0);
    }

    #[test]
    fn unmapped_read_without_prefill_is_free() {
        let mut c = cfg();
        c.ftl.prefill_reads = false;
        let mut s = Simulator::new(&c, vec![rec(0.0, IoKind::Read, 0, 4096)]).unwrap();
        let r = s.run().unwrap();
        assert_eq!(r.unmapped_reads, 2);
        assert_eq!(r.txn_count, 0);
        assert_eq!(r.ios, 1);
    }

    #[test]
    fn timed_arrivals_respect_timestamps() {
        let mut c = cfg();
        c.workload.arrival = ArrivalMode::Trace;
        let mut s = Simulator::new(&c, vec![rec(0.0, IoKind::Read, 0, 2048), rec(1000.0, IoKind::Read, 2048, 2048)]).unwrap();
        s.enable_trace();
        let r = s.run().unwrap();
        let tr = s.trace().unwrap();
        assert_eq!(tr.commits[1].time, 1_000_000);
        assert!(r.makespan_us > 1000.0);
        assert_eq!(r.queue_stall_us, 0.0);
    }

    #[test]
    fn full_queue_accrues_stall() {
        let mut c = cfg();
        c.queue.depth = 1;
        let recs = (0..4).map(|i| rec(0.0, IoKind::Read, i * 2048, 2048)).collect();
        let mut s = Simulator::new(&c, recs).unwrap();
        let r = s.run().unwrap();
        assert!(r.queue_stall_us > 0.0);
        assert_eq!(r.ios, 4);
    }
}
