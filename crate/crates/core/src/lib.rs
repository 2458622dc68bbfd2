//! Discrete-event simulator of a many-chip SSD with device-level I/O
//! schedulers: virtual-address FIFO (VAS), physical-address out-of-order
//! (PAS), and the Sprinkler family built from resource-driven traversal
//! (RIOS) and FLP-aware over-commitment (FARO).

pub mod config;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod flash;
pub mod ftl;
pub mod metrics;
pub mod sched;
pub mod workload;

pub use config::{Config, WorkloadSource};
pub use engine::{simulate, SimTrace, Simulator};
pub use error::{Result, SimError};
pub use flash::{FlpClass, Geometry, OpKind, PhysicalAddress, Tick, TimingParams};
pub use metrics::MetricsReport;
pub use sched::PolicyKind;
pub use workload::{IoKind, TraceRecord};
