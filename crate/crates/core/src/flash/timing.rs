use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Simulated time in nanoseconds.
pub type Tick = u64;

pub fn us_to_ticks(us: f64) -> Tick {
    (us * 1000.0).round() as Tick
}

pub fn ticks_to_us(t: Tick) -> f64 {
    t as f64 / 1000.0
}

/// Flash latencies in microseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingParams {
    pub read_cell_time: f64,
    pub program_cell_time_fast: f64,
    pub program_cell_time_slow: f64,
    pub erase_cell_time: f64,
    pub bus_transfer_time_per_page: f64,
    pub command_overhead_time: f64,
    pub txn_decision_window: f64,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            read_cell_time: 20.0,
            program_cell_time_fast: 200.0,
            program_cell_time_slow: 2200.0,
            erase_cell_time: 1500.0,
            bus_transfer_time_per_page: 12.3,
            command_overhead_time: 0.2,
            txn_decision_window: 1.0,
        }
    }
}

impl TimingParams {
    /// Transfer time for `page_size` bytes at `mts` mega-transfers per second
    /// on an 8-bit bus.
    pub fn bus_time_for(page_size: u32, mts: f64) -> f64 {
        page_size as f64 / mts
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("read_cell_time", self.read_cell_time),
            ("program_cell_time_fast", self.program_cell_time_fast),
            ("program_cell_time_slow", self.program_cell_time_slow),
            ("erase_cell_time", self.erase_cell_time),
            ("bus_transfer_time_per_page", self.bus_transfer_time_per_page),
            ("command_overhead_time", self.command_overhead_time),
            ("txn_decision_window", self.txn_decision_window),
        ];
        for (name, v) in all {
            if !v.is_finite() || v <= 0.0 {
                return Err(SimError::Config(format!("timing.{name} must be > 0")));
            }
            if us_to_ticks(v) == 0 {
                return Err(SimError::Config(format!("timing.{name} is below 1 ns")));
            }
        }
        Ok(())
    }

    pub fn ticks(&self) -> Timing {
        Timing {
            read: us_to_ticks(self.read_cell_time),
            program_fast: us_to_ticks(self.program_cell_time_fast),
            program_slow: us_to_ticks(self.program_cell_time_slow),
            erase: us_to_ticks(self.erase_cell_time),
            transfer: us_to_ticks(self.bus_transfer_time_per_page),
            command: us_to_ticks(self.command_overhead_time),
            window: us_to_ticks(self.txn_decision_window),
        }
    }
}

/// [`TimingParams`] converted to ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timing {
    pub read: Tick,
    pub program_fast: Tick,
    pub program_slow: Tick,
    pub erase: Tick,
    pub transfer: Tick,
    pub command: Tick,
    pub window: Tick,
}

impl Timing {
    /// Even pages within a block program fast, odd pages slow.
    pub fn program_time(&self, page: u32) -> Tick {
        if page.is_multiple_of(2) {
            self.program_fast
        } else {
            self.program_slow
        }
    }

    /// One single-page read transaction: command, cell read, data out.
    pub fn read_slot(&self) -> Tick {
        self.command + self.read + self.transfer
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_in_ticks() {
        let t = TimingParams::default().ticks();
        assert_eq!(t.read, 20_000);
        assert_eq!(t.transfer, 12_300);
        assert_eq!(t.command, 200);
        assert_eq!(t.program_time(4), 200_000);
        assert_eq!(t.program_time(5), 2_200_000);
    }

    #[test]
    fn onfi_rate_gives_default_transfer() {
        let us = TimingParams::bus_time_for(2048, 166.0);
        assert!((us - 12.3).abs() < 0.05);
    }

    #[test]
    fn nonpositive_rejected() {
        let t = TimingParams { erase_cell_time: 0.0, ..Default::default() };
        assert!(t.validate().is_err());
    }
}
