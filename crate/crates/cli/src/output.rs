use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use ssdsim_core::{MetricsReport, SimError};

use crate::sweep::Cell;

/// Writes `bytes` beside `path` and renames it into place, so readers never
/// see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("{}.partial", path.extension().and_then(|e| e.to_str()).unwrap_or("")));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))
}

#[derive(Serialize)]
struct ChipRow {
    chip: usize,
    channel: u32,
    offset: u32,
    utilization: f64,
    bus_activate: f64,
    bus_contention: f64,
    cell_activate: f64,
    idle: f64,
    txns: u64,
}

fn chip_csv(r: &MetricsReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &r.per_chip {
        w.serialize(ChipRow {
            chip: c.chip,
            channel: c.channel,
            offset: c.offset,
            utilization: c.utilization,
            bus_activate: c.breakdown.bus_activate,
            bus_contention: c.breakdown.bus_contention,
            cell_activate: c.breakdown.cell_activate,
            idle: c.breakdown.idle,
            txns: c.txns,
        })?;
    }
    Ok(w.into_inner()?)
}

/// `<stem>.json` holds the full report including the effective config;
/// `<stem>_chips.csv` has one row per chip.
pub fn write_report(dir: &Path, stem: &str, r: &MetricsReport) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_atomic(&dir.join(format!("{stem}.json")), serde_json::to_string_pretty(r)?.as_bytes())?;
    write_atomic(&dir.join(format!("{stem}_chips.csv")), &chip_csv(r)?)
}

/// One JSON report per successful cell under `cells/`, plus `sweep.csv`
/// with the axes, a status column and every report scalar.
pub fn write_sweep(dir: &Path, cells: &[Cell], results: &[Result<MetricsReport, SimError>]) -> Result<()> {
    let cell_dir = dir.join("cells");
    fs::create_dir_all(&cell_dir).with_context(|| format!("creating {}", cell_dir.display()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let scalar_names: Vec<&str> = results
        .iter()
        .find_map(|r| r.as_ref().ok())
        .map(|r| r.scalars().into_iter().map(|(k, _)| k).filter(|&k| k != "policy").collect())
        .unwrap_or_default();
    let mut header = vec!["cell", "chips", "transfer_size", "policy", "seed", "status", "error"];
    header.extend(&scalar_names);
    w.write_record(&header)?;
    for (cell, result) in cells.iter().zip(results) {
        let mut row = vec![
            cell.name(),
            cell.chips.to_string(),
            cell.size.map(|s| s.to_string()).unwrap_or_default(),
            cell.policy.to_string(),
            cell.config.workload.seed.to_string(),
        ];
        match result {
            Ok(r) => {
                write_report(&cell_dir, &cell.name(), r)?;
                row.push("ok".into());
                row.push(String::new());
                row.extend(r.scalars().into_iter().filter(|(k, _)| *k != "policy").map(|(_, v)| v));
            }
            Err(e) => {
                row.push("error".into());
                row.push(e.to_string());
                row.extend(scalar_names.iter().map(|_| String::new()));
            }
        }
        w.write_record(&row)?;
    }
    write_atomic(&dir.join("sweep.csv"), &w.into_inner()?)
}
