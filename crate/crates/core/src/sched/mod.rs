//! Device-level scheduling policies.
//!
//! A policy looks at the uncommitted memory requests of every queued tag and
//! at each chip's controller state, and returns the requests to commit now,
//! in order.

pub mod faro;
pub mod hazard;
pub mod pas;
pub mod pool;
pub mod rios;
pub mod sprinkler;
pub mod vas;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::flash::Geometry;

pub use faro::{brute_force_best, faro_best, faro_select, overlap_depths, Coalition, FaroPriority};
pub use hazard::{hazard_filter, Hazards};
pub use pool::{Entry, MemId, PendingPool, TagId};
pub use rios::rios_traverse;

/// Controller-side view of one chip.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChipStatus {
    /// Committed requests not yet finished (waiting or executing).
    pub outstanding: u32,
    /// Committed requests not yet in a transaction.
    pub waiting: u32,
}

impl ChipStatus {
    pub fn busy(&self) -> bool {
        self.outstanding > 0
    }
}

pub struct StepCtx<'a> {
    pub pool: &'a PendingPool,
    pub chips: &'a [ChipStatus],
    pub geometry: &'a Geometry,
    /// A force-unit-access tag sits in the device queue.
    pub fua_active: bool,
}

pub trait Policy: Send {
    fn kind(&self) -> PolicyKind;
    fn step(&mut self, ctx: &StepCtx) -> Vec<MemId>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Vas,
    Pas,
    Spk1,
    Spk2,
    Spk3,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [PolicyKind::Vas, PolicyKind::Pas, PolicyKind::Spk1, PolicyKind::Spk2, PolicyKind::Spk3];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Vas => "vas",
            PolicyKind::Pas => "pas",
            PolicyKind::Spk1 => "spk1",
            PolicyKind::Spk2 => "spk2",
            PolicyKind::Spk3 => "spk3",
        }
    }

    /// Whether the FTL tells this policy about migrated pages.
    pub fn readdressing(self) -> bool {
        matches!(self, PolicyKind::Spk1 | PolicyKind::Spk2 | PolicyKind::Spk3)
    }

    pub fn build(self) -> Box<dyn Policy> {
        match self {
            PolicyKind::Vas => Box::new(vas::Vas),
            PolicyKind::Pas => Box::new(pas::Pas),
            PolicyKind::Spk1 => Box::new(sprinkler::Spk1),
            PolicyKind::Spk2 => Box::new(sprinkler::Spk2),
            PolicyKind::Spk3 => Box::new(sprinkler::Spk3),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SimError::Config(format!("unknown policy '{s}' (vas|pas|spk1|spk2|spk3)")))
    }
}
