//! Run accounting and the final report.

pub mod interval;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Result, SimError};
use crate::flash::{ticks_to_us, FlpClass, Geometry, Tick, Timing, TxnSchedule};
use crate::sched::PolicyKind;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChipAccum {
    pub cell: Tick,
    pub bus: Tick,
    pub contention: Tick,
    pub txns: u64,
}

/// Running counters owned by one simulation.
#[derive(Debug, Clone, Default)]
pub struct Accum {
    pub chips: Vec<ChipAccum>,
    /// Chip-nanoseconds of inter-chip idleness.
    pub inter_idle: u128,
    /// Die-nanoseconds of intra-chip idleness.
    pub intra_idle: u128,
    pub pal_time: [Tick; 4],
    pub pal_count: [u64; 4],
    pub txn_count: u64,
    pub latencies: Vec<Tick>,
    pub bytes: u64,
    pub ios: u64,
    pub mem_requests: u64,
    pub queue_stall: Tick,
    pub stale_replays: u64,
    pub readdress_notifications: u64,
    pub gc_runs: u64,
    pub gc_migrations: u64,
    pub gc_erases: u64,
    pub unmapped_reads: u64,
    pub makespan: Tick,
}

impl Accum {
    pub fn new(g: &Geometry) -> Self {
        Accum { chips: vec![ChipAccum::default(); g.total_chips()], ..Default::default() }
    }

    /// Charges one executed transaction to `chip`. Within the transaction
    /// window, time with any die sensing/programming is cell time, remaining
    /// time with the chip's own data on the channel is bus time, and the
    /// rest is contention.
    pub fn record_txn(&mut self, chip: usize, s: &TxnSchedule, dies: u32) {
        let d = s.duration();
        let cells = interval::merge(s.cells.iter().map(|c| (c.1, c.2)).collect());
        let bus = interval::merge(s.bus.clone());
        let cell_t = interval::measure(&cells);
        let bus_t = interval::measure(&bus) - interval::overlap(&bus, &cells);
        let c = &mut self.chips[chip];
        c.cell += cell_t;
        c.bus += bus_t;
        c.contention += d - cell_t - bus_t;
        c.txns += 1;
        let die_cell: Tick = s.cells.iter().map(|c| c.2 - c.1).sum();
        self.intra_idle += dies as u128 * d as u128 - die_cell as u128;
        self.pal_time[s.class.index()] += d;
        self.pal_count[s.class.index()] += 1;
        self.txn_count += 1;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub bus_activate: f64,
    pub bus_contention: f64,
    pub cell_activate: f64,
    pub idle: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.bus_activate + self.bus_contention + self.cell_activate + self.idle
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PalHistogram {
    pub non_pal: f64,
    pub pal1: f64,
    pub pal2: f64,
    pub pal3: f64,
}

impl PalHistogram {
    pub fn get(&self, c: FlpClass) -> f64 {
        match c {
            FlpClass::NonPal => self.non_pal,
            FlpClass::Pal1 => self.pal1,
            FlpClass::Pal2 => self.pal2,
            FlpClass::Pal3 => self.pal3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipReport {
    pub chip: usize,
    pub channel: u32,
    pub offset: u32,
    pub utilization: f64,
    pub breakdown: Breakdown,
    pub txns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub policy: PolicyKind,
    pub workload_digest: String,
    pub makespan_us: f64,
    pub ios: u64,
    pub mem_requests: u64,
    pub bytes: u64,
    /// Bytes per microsecond, i.e. MB/s.
    pub bandwidth_mb_s: f64,
    pub iops: f64,
    pub latency_mean_us: f64,
    pub latency_p50_us: f64,
    pub latency_p99_us: f64,
    pub queue_stall_us: f64,
    pub queue_stall_normalized: Option<f64>,
    pub inter_chip_idle_us: f64,
    /// Inter-chip idleness in units of one single-page read transaction.
    pub inter_chip_idle_slots: f64,
    pub intra_chip_idle_us: f64,
    pub chip_utilization_mean: f64,
    pub breakdown: Breakdown,
    pub pal_histogram: PalHistogram,
    pub txn_count: u64,
    pub txn_reduction_vs_baseline: Option<f64>,
    pub stale_replays: u64,
    pub readdress_notifications: u64,
    pub gc_runs: u64,
    pub gc_migrations: u64,
    pub gc_erases: u64,
    pub unmapped_reads: u64,
    pub per_chip: Vec<ChipReport>,
    pub config: Config,
}

fn percentile(sorted: &[Tick], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    ticks_to_us(sorted[rank - 1])
}

/// Derives every report quantity from the accumulators; compares against
/// `baseline` when given.
pub fn finalize(
    acc: &Accum,
    cfg: &Config,
    timing: &Timing,
    digest: &str,
    baseline: Option<&MetricsReport>,
) -> Result<MetricsReport> {
    if let Some(b) = baseline {
        if b.workload_digest != digest {
            return Err(SimError::DigestMismatch { baseline: b.workload_digest.clone(), run: digest.to_string() });
        }
    }
    let g = &cfg.geometry;
    let span = acc.makespan;
    let frac = |x: Tick| if span == 0 { 0.0 } else { x as f64 / span as f64 };
    let per_chip: Vec<ChipReport> = acc
        .chips
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (channel, offset) = g.chip_coords(i);
            let cell = frac(c.cell);
            let bus = frac(c.bus);
            let contention = frac(c.contention);
            let breakdown = Breakdown {
                bus_activate: bus,
                bus_contention: contention,
                cell_activate: cell,
                idle: (1.0 - bus - contention - cell).max(0.0),
            };
            ChipReport { chip: i, channel, offset, utilization: cell + bus, breakdown, txns: c.txns }
        })
        .collect();
    let n = per_chip.len().max(1) as f64;
    let mean = |f: &dyn Fn(&ChipReport) -> f64| per_chip.iter().map(f).sum::<f64>() / n;
    let breakdown = Breakdown {
        bus_activate: mean(&|c| c.breakdown.bus_activate),
        bus_contention: mean(&|c| c.breakdown.bus_contention),
        cell_activate: mean(&|c| c.breakdown.cell_activate),
        idle: mean(&|c| c.breakdown.idle),
    };
    let pal_total: Tick = acc.pal_time.iter().sum();
    let pal = |i: usize| if pal_total == 0 { 0.0 } else { acc.pal_time[i] as f64 / pal_total as f64 };
    let mut lat = acc.latencies.clone();
    lat.sort_unstable();
    let span_us = ticks_to_us(span);
    let latency_mean_us = if lat.is_empty() {
        0.0
    } else {
        lat.iter().map(|&l| l as f64).sum::<f64>() / lat.len() as f64 / 1000.0
    };
    let inter_us = acc.inter_idle as f64 / 1000.0;
    let queue_stall_us = ticks_to_us(acc.queue_stall);
    Ok(MetricsReport {
        policy: cfg.policy.name,
        workload_digest: digest.to_string(),
        makespan_us: span_us,
        ios: acc.ios,
        mem_requests: acc.mem_requests,
        bytes: acc.bytes,
        bandwidth_mb_s: if span == 0 { 0.0 } else { acc.bytes as f64 / span_us },
        iops: if span == 0 { 0.0 } else { acc.ios as f64 / (span_us / 1e6) },
        latency_mean_us,
        latency_p50_us: percentile(&lat, 0.5),
        latency_p99_us: percentile(&lat, 0.99),
        queue_stall_us,
        queue_stall_normalized: baseline
            .filter(|b| b.queue_stall_us > 0.0)
            .map(|b| queue_stall_us / b.queue_stall_us),
        inter_chip_idle_us: inter_us,
        inter_chip_idle_slots: acc.inter_idle as f64 / timing.read_slot() as f64,
        intra_chip_idle_us: acc.intra_idle as f64 / 1000.0,
        chip_utilization_mean: mean(&|c| c.utilization),
        breakdown,
        pal_histogram: PalHistogram { non_pal: pal(0), pal1: pal(1), pal2: pal(2), pal3: pal(3) },
        txn_count: acc.txn_count,
        txn_reduction_vs_baseline: baseline
            .filter(|b| b.txn_count > 0)
            .map(|b| 1.0 - acc.txn_count as f64 / b.txn_count as f64),
        stale_replays: acc.stale_replays,
        readdress_notifications: acc.readdress_notifications,
        gc_runs: acc.gc_runs,
        gc_migrations: acc.gc_migrations,
        gc_erases: acc.gc_erases,
        unmapped_reads: acc.unmapped_reads,
        per_chip,
        config: cfg.clone(),
    })
}

impl MetricsReport {
    /// Fills the baseline-relative fields. Both runs must have seen the same
    /// workload.
    pub fn compare_to(&mut self, baseline: &MetricsReport) -> Result<()> {
        if baseline.workload_digest != self.workload_digest {
            return Err(SimError::DigestMismatch {
                baseline: baseline.workload_digest.clone(),
                run: self.workload_digest.clone(),
            });
        }
        self.queue_stall_normalized =
            (baseline.queue_stall_us > 0.0).then(|| self.queue_stall_us / baseline.queue_stall_us);
        self.txn_reduction_vs_baseline =
            (baseline.txn_count > 0).then(|| 1.0 - self.txn_count as f64 / baseline.txn_count as f64);
        Ok(())
    }

    /// Scalar columns for tabular output, in a stable order.
    pub fn scalars(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            ("policy", self.policy.to_string()),
            ("makespan_us", self.makespan_us.to_string()),
            ("ios", self.ios.to_string()),
            ("mem_requests", self.mem_requests.to_string()),
            ("bytes", self.bytes.to_string()),
            ("bandwidth_mb_s", self.bandwidth_mb_s.to_string()),
            ("iops", self.iops.to_string()),
            ("latency_mean_us", self.latency_mean_us.to_string()),
            ("latency_p50_us", self.latency_p50_us.to_string()),
            ("latency_p99_us", self.latency_p99_us.to_string()),
            ("queue_stall_us", self.queue_stall_us.to_string()),
            ("queue_stall_normalized", opt(self.queue_stall_normalized)),
            ("inter_chip_idle_us", self.inter_chip_idle_us.to_string()),
            ("inter_chip_idle_slots", self.inter_chip_idle_slots.to_string()),
            ("intra_chip_idle_us", self.intra_chip_idle_us.to_string()),
            ("chip_utilization_mean", self.chip_utilization_mean.to_string()),
            ("bus_activate", self.breakdown.bus_activate.to_string()),
            ("bus_contention", self.breakdown.bus_contention.to_string()),
            ("cell_activate", self.breakdown.cell_activate.to_string()),
            ("idle", self.breakdown.idle.to_string()),
            ("pal_non_pal", self.pal_histogram.non_pal.to_string()),
            ("pal1", self.pal_histogram.pal1.to_string()),
            ("pal2", self.pal_histogram.pal2.to_string()),
            ("pal3", self.pal_histogram.pal3.to_string()),
            ("txn_count", self.txn_count.to_string()),
            ("txn_reduction_vs_baseline", opt(self.txn_reduction_vs_baseline)),
            ("stale_replays", self.stale_replays.to_string()),
            ("readdress_notifications", self.readdress_notifications.to_string()),
            ("gc_runs", self.gc_runs.to_string()),
            ("gc_migrations", self.gc_migrations.to_string()),
            ("gc_erases", self.gc_erases.to_string()),
            ("workload_digest", self.workload_digest.clone()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flash::{OpKind, TimingParams};

    fn sched(cells: Vec<(u32, Tick, Tick)>, bus: Vec<(Tick, Tick)>, end: Tick, class: FlpClass) -> TxnSchedule {
        TxnSchedule {
            kind: OpKind::Read,
            class,
            composed_at: 0,
            bus_start: bus[0].0,
            cell_start: cells[0].1,
            cell_end: cells[0].2,
            completed_at: end,
            bus,
            cells,
            member_done: vec![end],
        }
    }

    #[test]
    fn single_read_on_two_die_chip_leaves_other_die_idle() {
        let g = Geometry::default();
        let mut a = Accum::new(&g);
        let s = sched(vec![(0, 200, 20_200)], vec![(0, 200), (20_200, 32_500)], 32_500, FlpClass::NonPal);
        a.record_txn(0, &s, 2);
        // Unused die idles for the full transaction; the used one outside its cell interval.
        assert_eq!(a.intra_idle, 32_500 + (32_500 - 20_000));
        assert_eq!(a.chips[0].cell, 20_000);
        assert_eq!(a.chips[0].bus, 12_500);
        assert_eq!(a.chips[0].contention, 0);
    }

    #[test]
    fn reduction_and_digest_check() {
        let cfg = Config::default();
        let t = TimingParams::default().ticks();
        let mut a = Accum::new(&cfg.geometry);
        a.txn_count = 1000;
        a.makespan = 10;
        let base = finalize(&a, &cfg, &t, "d", None).unwrap();
        assert!(base.txn_reduction_vs_baseline.is_none());
        a.txn_count = 500;
        let r = finalize(&a, &cfg, &t, "d", Some(&base)).unwrap();
        assert_eq!(r.txn_reduction_vs_baseline, Some(0.5));
        assert!(matches!(finalize(&a, &cfg, &t, "other", Some(&base)), Err(SimError::DigestMismatch { .. })));
    }

    #[test]
    fn breakdown_sums_to_one() {
        let cfg = Config::default();
        let t = TimingParams::default().ticks();
        let mut a = Accum::new(&cfg.geometry);
        let s = sched(vec![(0, 300, 20_300)], vec![(100, 300), (20_300, 32_600)], 32_600, FlpClass::NonPal);
        a.record_txn(3, &s, 2);
        a.makespan = 50_000;
        let r = finalize(&a, &cfg, &t, "d", None).unwrap();
        assert!((r.breakdown.total() - 1.0).abs() < 1e-9);
        for c in &r.per_chip {
            assert!((c.breakdown.total() - 1.0).abs() < 1e-9);
            assert!(c.utilization <= 1.0);
        }
        assert_eq!(r.per_chip[3].breakdown.bus_contention, 100.0 / 50_000.0);
    }

    #[test]
    fn percentiles() {
        let v: Vec<Tick> = (1..=100).map(|x| x * 1000).collect();
        assert_eq!(percentile(&v, 0.5), 50.0);
        assert_eq!(percentile(&v, 0.99), 99.0);
        assert_eq!(percentile(&[], 0.5), 0.0);
    }
}
