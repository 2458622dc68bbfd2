use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{IoKind, TraceRecord};
use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrace {
    pub records: Vec<TraceRecord>,
    /// Lines skipped as malformed.
    pub malformed: usize,
    /// Records that arrived with a timestamp earlier than a previous one.
    pub reordered: usize,
}

fn parse_line(line: &str) -> Option<(u64, IoKind, u64, u64)> {
    let f: Vec<&str> = line.split(',').map(str::trim).collect();
    if f.len() < 6 {
        return None;
    }
    let ts = f[0].parse::<u64>().ok()?;
    let kind = if f[3].eq_ignore_ascii_case("read") {
        IoKind::Read
    } else if f[3].eq_ignore_ascii_case("write") {
        IoKind::Write
    } else {
        return None;
    };
    let offset = f[4].parse::<u64>().ok()?;
    let length = f[5].parse::<u64>().ok()?;
    if length == 0 {
        return None;
    }
    Some((ts, kind, offset, length))
}

/// Parses MSR-Cambridge style CSV lines:
/// `timestamp,host,disk,type,offset,size,response[,...]` where the timestamp
/// counts 100 ns ticks. Output timestamps are microseconds from the earliest
/// record, sorted stably.
pub fn parse_trace<R: BufRead>(src: R, error_budget: usize) -> Result<ParsedTrace> {
    let mut raw = Vec::new();
    let mut malformed = 0;
    for (n, line) in src.lines().enumerate() {
        let line = line.map_err(|e| SimError::Trace(format!("read error at line {}: {e}", n + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Some(r) => raw.push(r),
            None => {
                malformed += 1;
                if malformed > error_budget {
                    return Err(SimError::Trace(format!(
                        "more than {error_budget} malformed lines (last at line {})",
                        n + 1
                    )));
                }
            }
        }
    }
    if raw.is_empty() {
        return Err(SimError::Trace("trace has no records".into()));
    }
    let mut reordered = 0;
    let mut high = 0;
    for r in &raw {
        if r.0 < high {
            reordered += 1;
        }
        high = high.max(r.0);
    }
    raw.sort_by_key(|r| r.0);
    let base = raw[0].0;
    let records = raw
        .into_iter()
        .map(|(ts, kind, offset, length)| TraceRecord {
            timestamp: (ts - base) as f64 / 10.0,
            kind,
            offset,
            length,
            fua: false,
        })
        .collect();
    Ok(ParsedTrace { records, malformed, reordered })
}

pub fn parse_trace_file(path: &Path, error_budget: usize) -> Result<ParsedTrace> {
    let f = File::open(path).map_err(|e| SimError::Trace(format!("{}: {e}", path.display())))?;
    parse_trace(BufReader::new(f), error_budget).map_err(|e| match e {
        SimError::Trace(m) => SimError::Trace(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Writes records back in the same CSV layout, with timestamps offset from
/// `base` ticks.
pub fn write_trace<W: Write>(records: &[TraceRecord], base: u64, mut out: W) -> std::io::Result<()> {
    for r in records {
        let ts = base + (r.timestamp * 10.0).round() as u64;
        let kind = match r.kind {
            IoKind::Read => "Read",
            IoKind::Write => "Write",
        };
        writeln!(out, "{ts},ssdsim,0,{kind},{},{},0", r.offset, r.length)?;
    }
    Ok(())
}
