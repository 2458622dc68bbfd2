//! Shared inputs for the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssdsim_core::config::{ArrivalMode, Config, WorkloadSource};
use ssdsim_core::flash::{Geometry, OpKind, PhysicalAddress};
use ssdsim_core::sched::{Entry, PendingPool};
use ssdsim_core::PolicyKind;

/// Geometry with `chips` chips (a power of four up to 1024) and small blocks
/// so FTL setup stays cheap.
pub fn geometry(chips: usize) -> Geometry {
    let mut g = Geometry::default().with_total_chips(chips as u32);
    g.blocks_per_die = 256;
    g.pages_per_block = 64;
    g
}

/// Closed-loop random read workload on `chips` chips.
pub fn read_config(policy: PolicyKind, chips: usize, count: usize) -> Config {
    let mut c = Config { geometry: geometry(chips), ..Config::default() };
    c.policy.name = policy;
    c.workload.source = WorkloadSource::Synthetic;
    c.workload.arrival = ArrivalMode::ClosedLoop;
    c.workload.count = count;
    c.workload.sizes = vec![4096, 16384, 65536];
    c
}

/// A pending pool of `tags` single-page reads spread pseudo-randomly over
/// the device, `pages` pages per tag.
pub fn pool(g: &Geometry, tags: u64, pages: u64) -> PendingPool {
    let mut p = PendingPool::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut seq = 0;
    for tag in 0..tags {
        for _ in 0..pages {
            let addr = PhysicalAddress {
                channel: rng.random_range(0..g.num_channels),
                chip: rng.random_range(0..g.chips_per_channel),
                die: rng.random_range(0..g.dies_per_chip),
                plane: rng.random_range(0..g.planes_per_die),
                block: rng.random_range(0..g.blocks_per_plane()),
                page: rng.random_range(0..4),
            };
            let mem = seq as usize;
            p.insert(Entry { mem, tag, seq, kind: OpKind::Read, vpage: seq, addr, chip: addr.chip_id(g) }, false);
            seq += 1;
        }
    }
    p
}
