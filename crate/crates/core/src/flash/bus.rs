use std::collections::BTreeMap;

use super::timing::Tick;

/// Reservation book for one shared channel. Grants never overlap; a request
/// takes the earliest gap at or after its ready time that fits it.
#[derive(Debug, Clone, Default)]
pub struct BusState {
    grants: BTreeMap<Tick, Tick>,
}

impl BusState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reserves `duration` ticks starting no earlier than `start`; returns the
    /// granted start.
    pub fn arbitrate(&mut self, start: Tick, duration: Tick) -> Tick {
        assert!(duration > 0, "zero-length bus grant");
        let mut at = start;
        if let Some((_, &end)) = self.grants.range(..=at).next_back() {
            at = at.max(end);
        }
        for (&s, &e) in self.grants.range(at..) {
            if s >= at + duration {
                break;
            }
            at = e;
        }
        self.grants.insert(at, at + duration);
        at
    }

    /// Drops grants that ended at or before `t`.
    pub fn prune(&mut self, t: Tick) {
        while let Some((&s, &e)) = self.grants.first_key_value() {
            if e > t {
                break;
            }
            self.grants.remove(&s);
        }
    }

    pub fn grants(&self) -> impl Iterator<Item = (Tick, Tick)> + '_ {
        self.grants.iter().map(|(&s, &e)| (s, e))
    }
}
