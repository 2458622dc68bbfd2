//! Flash medium: geometry, timing, transaction legality and execution.

pub mod bus;
pub mod exec;
pub mod flp;
pub mod geometry;
pub mod timing;

pub use bus::BusState;
pub use exec::{execute_transaction, ChipState, TxnSchedule};
pub use flp::{check_plane_share_legal, classify_flp, txn_legal, FlpClass, TxnShape};
pub use geometry::{ChipId, Geometry, OpKind, PhysicalAddress};
pub use timing::{ticks_to_us, us_to_ticks, Tick, Timing, TimingParams};
