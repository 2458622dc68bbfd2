//! Run configuration: one TOML document with `[geometry]`, `[timing]`,
//! `[queue]`, `[ftl]`, `[workload]` and `[policy]` sections.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::flash::{Geometry, TimingParams};
use crate::ftl::FtlConfig;
use crate::sched::PolicyKind;
use crate::workload::{self, AddressPattern, Arrival, SizeDist, SynthSpec, TraceRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueueConfig {
    pub depth: usize,
}

impl Default for QueueConfig {
    fn default() -> Self {
        QueueConfig { depth: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadSource {
    #[default]
    Synthetic,
    Trace,
    Inline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalMode {
    /// Back-to-back: the host refills the queue as soon as an entry frees.
    #[default]
    ClosedLoop,
    /// Synthetic exponential inter-arrival at `rate_iops`.
    Poisson,
    /// Record timestamps drive arrivals.
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AddressKind {
    Sequential,
    #[default]
    UniformRandom,
    Locality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadConfig {
    pub source: WorkloadSource,
    pub arrival: ArrivalMode,
    pub count: usize,
    pub read_fraction: f64,
    /// Transfer sizes in bytes; drawn with `size_weights` (uniform if empty).
    pub sizes: Vec<u64>,
    pub size_weights: Vec<f64>,
    pub address: AddressKind,
    pub hot_fraction: f64,
    pub hot_ratio: f64,
    pub rate_iops: f64,
    pub seed: u64,
    pub fua_fraction: f64,
    /// Address range for synthetic offsets; 0 means the exported capacity.
    pub span_bytes: u64,
    /// Offset granularity; 0 means the page size.
    pub align_bytes: u64,
    pub path: Option<PathBuf>,
    pub error_budget: usize,
    /// Keep only the first N trace records (0 = all).
    pub max_records: usize,
    pub records: Vec<TraceRecord>,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            source: WorkloadSource::Synthetic,
            arrival: ArrivalMode::ClosedLoop,
            count: 1000,
            read_fraction: 1.0,
            sizes: vec![4096],
            size_weights: Vec::new(),
            address: AddressKind::UniformRandom,
            hot_fraction: 0.1,
            hot_ratio: 0.9,
            rate_iops: 10_000.0,
            seed: 1,
            fua_fraction: 0.0,
            span_bytes: 0,
            align_bytes: 0,
            path: None,
            error_budget: 0,
            max_records: 0,
            records: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub name: PolicyKind,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig { name: PolicyKind::Spk3 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub geometry: Geometry,
    pub timing: TimingParams,
    pub queue: QueueConfig,
    pub ftl: FtlConfig,
    pub workload: WorkloadConfig,
    pub policy: PolicyConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        Self::load_with_overrides(Some(path), &[])
    }

    /// Reads `path` (or starts from defaults), applies `section.field=value`
    /// overrides and resolves a relative trace path against the file's
    /// directory.
    pub fn load_with_overrides(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| SimError::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut cfg = load_with_overrides(&text, overrides)?;
        if let (Some(dir), Some(trace)) = (path.and_then(Path::parent), &cfg.workload.path) {
            if trace.is_relative() {
                cfg.workload.path = Some(dir.join(trace));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.timing.validate()?;
        self.ftl.validate()?;
        if self.queue.depth == 0 {
            return Err(SimError::Config("queue.depth must be >= 1".into()));
        }
        if self.workload.source == WorkloadSource::Trace && self.workload.path.is_none() {
            return Err(SimError::Config("workload.path is required for trace workloads".into()));
        }
        if self.workload.source == WorkloadSource::Synthetic {
            self.synth_spec()?.validate()?;
        }
        Ok(())
    }

    pub fn exported_bytes(&self) -> u64 {
        let pages = (self.geometry.raw_pages() as f64 * self.ftl.export_fraction).floor() as u64;
        pages * self.geometry.page_size as u64
    }

    pub fn synth_spec(&self) -> Result<SynthSpec> {
        let w = &self.workload;
        let sizes = match (w.sizes.as_slice(), w.size_weights.as_slice()) {
            ([], _) => return Err(SimError::Config("workload.sizes is empty".into())),
            ([s], []) => SizeDist::Fixed(*s),
            (s, []) => SizeDist::Mixture(s.iter().map(|&x| (x, 1.0)).collect()),
            (s, wts) if s.len() == wts.len() => SizeDist::Mixture(s.iter().copied().zip(wts.iter().copied()).collect()),
            _ => return Err(SimError::Config("workload.size_weights must match workload.sizes".into())),
        };
        let address = match w.address {
            AddressKind::Sequential => AddressPattern::Sequential,
            AddressKind::UniformRandom => AddressPattern::UniformRandom,
            AddressKind::Locality => AddressPattern::Locality { hot_fraction: w.hot_fraction, hot_ratio: w.hot_ratio },
        };
        let arrival = match w.arrival {
            ArrivalMode::Poisson => Arrival::Poisson(w.rate_iops),
            _ => Arrival::ClosedLoop,
        };
        let exported = self.exported_bytes();
        let span = if w.span_bytes == 0 { exported } else { w.span_bytes.min(exported) };
        let align = if w.align_bytes == 0 { self.geometry.page_size as u64 } else { w.align_bytes };
        Ok(SynthSpec {
            count: w.count,
            read_fraction: w.read_fraction,
            sizes,
            address,
            arrival,
            seed: w.seed,
            fua_fraction: w.fua_fraction,
            span,
            align,
        })
    }

    /// Materializes the host workload.
    pub fn load_workload(&self) -> Result<Vec<TraceRecord>> {
        let w = &self.workload;
        let mut records = match w.source {
            WorkloadSource::Synthetic => workload::generate(&self.synth_spec()?)?,
            WorkloadSource::Inline => w.records.clone(),
            WorkloadSource::Trace => {
                let path = w.path.as_ref().ok_or_else(|| SimError::Config("workload.path missing".into()))?;
                workload::parse_trace_file(path, w.error_budget)?.records
            }
        };
        if w.max_records > 0 {
            records.truncate(w.max_records);
        }
        if let Some(r) = records.iter().find(|r| r.length == 0) {
            return Err(SimError::Trace(format!("zero-length record at offset {}", r.offset)));
        }
        Ok(records)
    }

    /// Host issues back-to-back rather than at record timestamps.
    pub fn closed_loop(&self) -> bool {
        self.workload.arrival == ArrivalMode::ClosedLoop
    }
}

/// Sets `section.field = value` inside a TOML document. `value` is parsed as
/// a TOML literal when possible, otherwise taken as a string.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| SimError::Config(format!("override '{assignment}' is not key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| SimError::Config(format!("empty override key in '{assignment}'")))?;
    let mut table = doc;
    for p in parts {
        table = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| SimError::Config(format!("'{p}' in '{path}' is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Parses `text`, applies overrides in order and validates the result.
pub fn load_with_overrides(text: &str, overrides: &[String]) -> Result<Config> {
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg: Config = toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| SimError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
