//! Property checks shared by the proptest suite and the acceptance runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};

use ssdsim_core::config::{ArrivalMode, Config, WorkloadSource};
use ssdsim_core::flash::{classify_flp, txn_legal, Geometry, OpKind, PhysicalAddress};
use ssdsim_core::ftl::{Ftl, FtlConfig};
use ssdsim_core::sched::{brute_force_best, faro_best, faro_select, Entry};
use ssdsim_core::{IoKind, MetricsReport, PolicyKind, SimError, SimTrace, Simulator, TraceRecord};

pub const CASES: u32 = 1000;

/// Leaves enough spare blocks per die that GC always finds invalid pages.
pub fn ftl_config(fill: f64) -> FtlConfig {
    FtlConfig {
        export_fraction: 0.7,
        free_block_threshold: 0.125,
        precondition_fill: fill,
        precondition_io_bytes: 8192,
        ..FtlConfig::default()
    }
}

pub fn small_geometry() -> Geometry {
    Geometry {
        num_channels: 2,
        chips_per_channel: 2,
        dies_per_chip: 2,
        planes_per_die: 4,
        blocks_per_die: 32,
        pages_per_block: 8,
        page_size: 2048,
    }
}

#[derive(Debug, Clone)]
pub struct Case {
    pub policy: PolicyKind,
    pub depth: usize,
    pub timed: bool,
    pub fill: f64,
    pub records: Vec<TraceRecord>,
}

impl Case {
    pub fn config(&self) -> Config {
        let mut c = Config { geometry: small_geometry(), ..Config::default() };
        c.ftl = ftl_config(self.fill);
        c.queue.depth = self.depth;
        c.policy.name = self.policy;
        c.workload.source = WorkloadSource::Inline;
        c.workload.arrival = if self.timed { ArrivalMode::Trace } else { ArrivalMode::ClosedLoop };
        c.workload.records = self.records.clone();
        c
    }

    pub fn run(&self) -> Result<(MetricsReport, SimTrace), SimError> {
        let mut sim = Simulator::new(&self.config(), self.records.clone())?;
        sim.enable_trace();
        let r = sim.run()?;
        Ok((r, sim.trace().cloned().expect("trace enabled")))
    }
}

fn policy() -> impl Strategy<Value = PolicyKind> {
    prop::sample::select(PolicyKind::ALL.to_vec())
}

fn records(fua_prob: f64) -> impl Strategy<Value = Vec<TraceRecord>> {
    let span = 800 * 2048u64;
    prop::collection::vec(
        (any::<bool>(), 0..span, 1u64..6 * 2048, prop::bool::weighted(fua_prob), 0.0..40.0f64),
        1..16,
    )
    .prop_map(|rows| {
        let mut t = 0.0;
        rows.into_iter()
            .map(|(write, offset, length, fua, gap)| {
                t += gap;
                TraceRecord {
                    timestamp: t,
                    kind: if write { IoKind::Write } else { IoKind::Read },
                    offset,
                    length,
                    fua,
                }
            })
            .collect()
    })
}

/// Mixed workloads on a small device, half of them preconditioned so
/// writes trigger GC during the run.
pub fn case() -> impl Strategy<Value = Case> {
    (policy(), 1usize..8, any::<bool>(), prop::sample::select(vec![0.0, 0.95]), records(0.1))
        .prop_map(|(policy, depth, timed, fill, records)| Case { policy, depth, timed, fill, records })
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn run_ok(c: &Case) -> Result<(MetricsReport, SimTrace), TestCaseError> {
    c.run().map_err(|e| fail(format!("run failed: {e}")))
}

/// Every accepted memory request completes exactly once and every I/O
/// retires exactly once.
pub fn check_conservation(c: &Case) -> Result<(), TestCaseError> {
    let (r, tr) = run_ok(c)?;
    let mut accepted = tr.accepted.clone();
    accepted.sort_unstable();
    let mut done: Vec<u64> = tr.completions.iter().map(|x| x.0).collect();
    done.sort_unstable();
    prop_assert_eq!(&accepted, &done);
    prop_assert_eq!(r.mem_requests as usize, accepted.len());
    prop_assert_eq!(r.ios as usize, c.records.len());
    let retired: BTreeSet<u64> = tr.retired.iter().map(|x| x.0).collect();
    prop_assert_eq!(retired.len(), tr.retired.len());
    prop_assert_eq!(retired, (0..c.records.len() as u64).collect::<BTreeSet<_>>());
    let committed: BTreeSet<u64> = tr.commits.iter().map(|x| x.seq).collect();
    prop_assert_eq!(committed.len(), tr.commits.len());
    prop_assert_eq!(committed.len(), accepted.len());
    Ok(())
}

/// A tag retires at the instant its last memory request completes, and read
/// data leaves in page order.
pub fn check_bitmap_and_dma(c: &Case) -> Result<(), TestCaseError> {
    let (_, tr) = run_ok(c)?;
    let mut last: BTreeMap<u64, u64> = BTreeMap::new();
    for &(_, tag, t) in &tr.completions {
        let e = last.entry(tag).or_default();
        *e = (*e).max(t);
    }
    for &(tag, t) in &tr.retired {
        if let Some(&l) = last.get(&tag) {
            prop_assert_eq!(t, l, "tag {} retired at {} but its last page finished at {}", tag, t, l);
        }
    }
    let mut delivered: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for &(tag, page) in &tr.deliveries {
        delivered.entry(tag).or_default().push(page);
    }
    let ps = 2048;
    for (i, r) in c.records.iter().enumerate() {
        let pages = ((r.offset + r.length - 1) / ps - r.offset / ps + 1) as u32;
        let got = delivered.remove(&(i as u64)).unwrap_or_default();
        if r.kind == IoKind::Read {
            prop_assert_eq!(got, (0..pages).collect::<Vec<_>>(), "read tag {} delivered out of order", i);
        } else {
            prop_assert!(got.is_empty());
        }
    }
    Ok(())
}

/// Every executed transaction is one chip, one kind, and plane-share legal.
pub fn check_legality(c: &Case) -> Result<(), TestCaseError> {
    let (_, tr) = run_ok(c)?;
    let g = small_geometry();
    prop_assert!(!tr.txns.is_empty());
    for t in &tr.txns {
        prop_assert!(txn_legal(&t.members, &g), "illegal transaction {:?}", t.members);
        prop_assert!(t.members.iter().all(|m| m.1.chip_id(&g) == t.chip));
        let addrs: Vec<PhysicalAddress> = t.members.iter().map(|m| m.1).collect();
        prop_assert_eq!(classify_flp(&addrs, &g).map_err(|e| fail(e.to_string()))?, t.class);
    }
    Ok(())
}

/// Identical inputs give identical reports and event logs.
pub fn check_determinism(c: &Case) -> Result<(), TestCaseError> {
    let (a, ta) = run_ok(c)?;
    let (b, tb) = run_ok(c)?;
    prop_assert_eq!(a, b);
    prop_assert_eq!(ta, tb);
    Ok(())
}

/// With every I/O marked force-unit-access, each policy commits exactly as
/// VAS does.
pub fn fua_case() -> impl Strategy<Value = Case> {
    (policy(), 1usize..8, any::<bool>(), records(1.0))
        .prop_map(|(policy, depth, timed, records)| Case { policy, depth, timed, fill: 0.0, records })
}

pub fn check_fua_order(c: &Case) -> Result<(), TestCaseError> {
    let (_, tr) = run_ok(c)?;
    let vas = Case { policy: PolicyKind::Vas, ..c.clone() };
    let (_, tv) = run_ok(&vas)?;
    let key = |t: &SimTrace| t.commits.iter().map(|x| (x.time, x.tag, x.vpage)).collect::<Vec<_>>();
    prop_assert_eq!(key(&tr), key(&tv));
    Ok(())
}

#[derive(Debug, Clone)]
pub enum FtlOp {
    Write(u64),
    Gc(usize, u32),
}

pub fn ftl_storm() -> impl Strategy<Value = (f64, Vec<FtlOp>)> {
    let op = prop_oneof![
        8 => (0u64..1400).prop_map(FtlOp::Write),
        1 => (0usize..4, 0u32..2).prop_map(|(c, d)| FtlOp::Gc(c, d)),
    ];
    (prop::sample::select(vec![0.0, 0.5, 0.95]), prop::collection::vec(op, 1..400))
}

/// Random overwrites and forced GC leave a consistent map: one valid copy
/// per written page, counters matching the block contents.
pub fn check_ftl_storm(input: &(f64, Vec<FtlOp>)) -> Result<(), TestCaseError> {
    let (fill, ops) = input;
    let mut f = Ftl::new(&small_geometry(), &ftl_config(*fill)).map_err(|e| fail(e.to_string()))?;
    f.precondition().map_err(|e| fail(e.to_string()))?;
    let mut written: BTreeSet<u64> = (0..f.exported_pages()).filter(|&v| f.lookup(v).is_some()).collect();
    for op in ops {
        match *op {
            FtlOp::Write(v) => {
                let a = f.write(v).map_err(|e| fail(format!("write {v}: {e}")))?;
                f.collect(a.chip_id(f.geometry()), a.die).map_err(|e| fail(e.to_string()))?;
                written.insert(v);
            }
            FtlOp::Gc(chip, die) => match f.run_gc(chip, die) {
                Ok(rep) => {
                    for m in &rep.migrations {
                        prop_assert_eq!(f.lookup(m.vpage), Some(m.new));
                    }
                }
                Err(SimError::CapacityExhausted { .. }) => {}
                Err(e) => return Err(fail(e.to_string())),
            },
        }
        f.audit().map_err(fail)?;
    }
    prop_assert_eq!(f.mapped_pages() as usize, written.len());
    Ok(())
}

pub fn bucket() -> impl Strategy<Value = Vec<Entry>> {
    let kind = prop_oneof![6 => Just(OpKind::Read), 3 => Just(OpKind::Program), 1 => Just(OpKind::Erase)];
    prop::collection::vec((0u64..4, kind, 0u32..2, 0u32..4, 0u32..3), 1..=16).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (tag, kind, die, plane, page))| Entry {
                mem: i,
                tag,
                seq: i as u64,
                kind,
                vpage: i as u64,
                addr: PhysicalAddress { channel: 0, chip: 0, die, plane, block: 0, page },
                chip: 0,
            })
            .collect()
    })
}

/// FARO's first coalition matches the best (size, connectivity) found by
/// enumerating every subset, and every selection it makes is legal.
pub fn check_faro(entries: &[Entry]) -> Result<(), TestCaseError> {
    let g = Geometry::default();
    let best = faro_best(entries).ok_or_else(|| fail("no coalition".into()))?;
    let (size, conn) = brute_force_best(entries, &g);
    prop_assert_eq!((best.priority.overlap_depth, best.priority.connectivity), (size, conn));
    prop_assert_eq!(best.members.len(), size);
    let ops: Vec<(OpKind, PhysicalAddress)> = best.members.iter().map(|&m| (entries[m].kind, entries[m].addr)).collect();
    prop_assert!(txn_legal(&ops, &g));
    let mut per_tag: BTreeMap<u64, usize> = BTreeMap::new();
    for &m in &best.members {
        *per_tag.entry(entries[m].tag).or_default() += 1;
    }
    prop_assert_eq!(per_tag.values().copied().max().unwrap_or(0), conn);
    for budget in [1, 4, 8, 16] {
        let sel = faro_select(entries, budget);
        prop_assert!(sel.len() <= budget);
        let uniq: BTreeSet<usize> = sel.iter().copied().collect();
        prop_assert_eq!(uniq.len(), sel.len());
    }
    Ok(())
}

/// Runs `check` over `cases` inputs from a runner seeded with `seed`.
/// On failure the message carries the seed and the shrunk input.
pub fn run_suite<S, F>(strategy: S, cases: u32, seed: u64, check: F) -> Result<u32, String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(&S::Value) -> Result<(), TestCaseError>,
{
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &bytes);
    let cfg = RunnerConfig { cases, failure_persistence: None, ..RunnerConfig::default() };
    let mut runner = TestRunner::new_with_rng(cfg, rng);
    match runner.run(&strategy, |v| check(&v)) {
        Ok(()) => Ok(cases),
        Err(TestError::Fail(why, input)) => Err(format!("seed {seed}: {why}; minimal input {input:?}")),
        Err(TestError::Abort(why)) => Err(format!("seed {seed}: aborted: {why}")),
    }
}
