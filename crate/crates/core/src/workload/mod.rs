//! Host workloads: block-trace ingestion and synthetic generation.

pub mod synth;
pub mod trace;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use synth::{generate, AddressPattern, Arrival, SizeDist, SynthSpec};
pub use trace::{parse_trace, parse_trace_file, write_trace, ParsedTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IoKind {
    Read,
    Write,
}

/// One host I/O. `timestamp` is in microseconds from the start of the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    #[serde(default)]
    pub timestamp: f64,
    pub kind: IoKind,
    pub offset: u64,
    pub length: u64,
    #[serde(default)]
    pub fua: bool,
}

/// Hex SHA-256 over a canonical rendering of the stream.
pub fn digest(records: &[TraceRecord]) -> String {
    let mut h = Sha256::new();
    for r in records {
        let line = format!(
            "{}|{}|{}|{}|{}\n",
            r.timestamp.to_bits(),
            matches!(r.kind, IoKind::Write) as u8,
            r.offset,
            r.length,
            r.fua as u8
        );
        h.update(line.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sensitive_to_content() {
        let a = vec![TraceRecord { timestamp: 0.0, kind: IoKind::Read, offset: 0, length: 4096, fua: false }];
        let mut b = a.clone();
        b[0].offset = 2048;
        assert_eq!(digest(&a), digest(&a.clone()));
        assert_ne!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }
}
