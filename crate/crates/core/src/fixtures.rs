//! Frozen workloads shared by tests, benches and the bundled configs.
//!
//! The worked example is a 3-channel, 9-chip device serving five read I/Os
//! (#1..#5, tags 0..4) made of 19 single-page memory requests. Chip `Ck` is
//! the flat chip index. Sensing dominates every other latency so that one
//! single-page read transaction is one idle-slot unit.

use crate::config::{AddressKind, ArrivalMode, Config, WorkloadSource};
use crate::flash::{Geometry, PhysicalAddress, TimingParams};
use crate::ftl::Placement;
use crate::sched::PolicyKind;
use crate::workload::{IoKind, TraceRecord};

/// Page index (within I/O order) and location of every worked-example page:
/// `(vpage, chip, die, plane, page)`.
const LAYOUT: [(u64, usize, u32, u32, u32); 19] = [
    // #1
    (0, 0, 0, 0, 0),
    (1, 1, 0, 0, 0),
    (2, 2, 0, 0, 0),
    (3, 3, 0, 0, 0),
    // #2
    (4, 0, 1, 0, 0),
    (5, 1, 1, 0, 0),
    (6, 2, 1, 0, 0),
    (7, 3, 0, 1, 0),
    (8, 5, 1, 0, 0),
    // #3
    (9, 5, 0, 0, 0),
    (10, 5, 0, 0, 1),
    (11, 5, 0, 0, 2),
    (12, 8, 0, 0, 0),
    // #4
    (13, 3, 1, 0, 1),
    (14, 7, 0, 0, 0),
    (15, 7, 1, 0, 0),
    // #5
    (16, 3, 1, 1, 1),
    (17, 6, 0, 0, 0),
    (18, 6, 0, 1, 0),
];

/// Pages per I/O, in arrival order.
const IO_PAGES: [u64; 5] = [4, 5, 4, 3, 3];

pub fn worked_example_geometry() -> Geometry {
    Geometry {
        num_channels: 3,
        chips_per_channel: 3,
        dies_per_chip: 2,
        planes_per_die: 4,
        blocks_per_die: 32,
        pages_per_block: 16,
        page_size: 2048,
    }
}

/// The worked example under `policy`.
pub fn worked_example(policy: PolicyKind) -> Config {
    let g = worked_example_geometry();
    let mut c = Config { geometry: g.clone(), ..Config::default() };
    c.timing = TimingParams {
        read_cell_time: 100.0,
        bus_transfer_time_per_page: 0.001,
        command_overhead_time: 0.001,
        txn_decision_window: 0.001,
        ..TimingParams::default()
    };
    c.ftl.placements = LAYOUT
        .iter()
        .map(|&(vpage, chip, die, plane, page)| {
            let (channel, offset) = g.chip_coords(chip);
            Placement { vpage, addr: PhysicalAddress { channel, chip: offset, die, plane, block: 0, page } }
        })
        .collect();
    c.workload.source = WorkloadSource::Inline;
    c.workload.arrival = ArrivalMode::ClosedLoop;
    let mut offset = 0;
    c.workload.records = IO_PAGES
        .iter()
        .map(|&n| {
            let r = TraceRecord { timestamp: 0.0, kind: IoKind::Read, offset: offset * 2048, length: n * 2048, fua: false };
            offset += n;
            r
        })
        .collect();
    c.policy.name = policy;
    c
}

/// Expected SPK3 commitment order on the worked example as `(tag, vpage)`.
/// Chips are visited by chip offset: C0-C2, then C3-C5, then C6-C8.
pub const WORKED_EXAMPLE_SPK3_ORDER: [(u64, u64); 19] = [
    (0, 0),
    (1, 4),
    (0, 1),
    (1, 5),
    (0, 2),
    (1, 6),
    (0, 3),
    (1, 7),
    (3, 13),
    (4, 16),
    (2, 9),
    (1, 8),
    (2, 10),
    (2, 11),
    (4, 17),
    (4, 18),
    (3, 14),
    (3, 15),
    (2, 12),
];

/// Number of SPK3 commitments per chip-offset round on the worked example.
pub const WORKED_EXAMPLE_SPK3_ROUNDS: [usize; 3] = [6, 8, 5];

/// Closed-loop sequential write stream of mixed 4-64 KB I/Os on 64 chips.
/// Consecutive pages land on every plane at matching offsets, so most
/// requests can share a program cell interval.
pub fn coalescible_writes(policy: PolicyKind, count: usize) -> Config {
    let mut c = Config::default();
    c.policy.name = policy;
    c.workload.count = count;
    c.workload.read_fraction = 0.0;
    c.workload.sizes = vec![4096, 8192, 16384, 32768, 65536];
    c.workload.address = AddressKind::Sequential;
    c
}

/// Closed-loop uniform random 16 KB reads on `chips` chips.
pub fn random_reads(policy: PolicyKind, chips: u32, count: usize) -> Config {
    let mut c = Config::default();
    c.geometry = c.geometry.with_total_chips(chips);
    c.policy.name = policy;
    c.workload.count = count;
    c.workload.sizes = vec![16384];
    c
}

/// Half-write random 4-64 KB mix on a small 64-chip device filled to
/// `fill` of its exported space with 1 MB random writes beforehand.
pub fn aged_device(policy: PolicyKind, count: usize, fill: f64) -> Config {
    let mut c = Config::default();
    c.geometry.blocks_per_die = 64;
    c.geometry.pages_per_block = 64;
    c.ftl.precondition_fill = fill;
    c.policy.name = policy;
    c.workload.count = count;
    c.workload.read_fraction = 0.5;
    c.workload.sizes = vec![4096, 8192, 16384, 32768, 65536];
    c
}
