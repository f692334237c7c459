use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use time4_wire::OfpTime;

use crate::Nanos;

/// Controller time zero on every switch clock with zero offset.
pub const EPOCH_NS: i128 = 1_000_000 * 1_000_000_000;

/// Per-switch clock offsets: switch clock = controller clock + offset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClockRegistry {
    offsets: BTreeMap<usize, Nanos>,
}

impl ClockRegistry {
    pub fn zero(switches: usize) -> Self {
        ClockRegistry { offsets: (0..switches).map(|s| (s, 0)).collect() }
    }

    pub fn from_offsets(offsets: impl IntoIterator<Item = (usize, Nanos)>) -> Self {
        ClockRegistry { offsets: offsets.into_iter().collect() }
    }

    /// Offsets drawn uniformly from [-spread, spread].
    pub fn random(switches: usize, spread: Nanos, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offsets = (0..switches).map(|s| (s, if spread > 0 { rng.gen_range(-spread..=spread) } else { 0 }));
        Self::from_offsets(offsets)
    }

    pub fn set(&mut self, switch: usize, offset: Nanos) {
        self.offsets.insert(switch, offset);
    }

    pub fn offset(&self, switch: usize) -> Option<Nanos> {
        self.offsets.get(&switch).copied()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// T_s^i = T_s + offset_i, as read on switch `switch`'s clock.
    pub fn switch_time(&self, switch: usize, t: Nanos) -> Option<OfpTime> {
        to_switch_clock(t, self.offset(switch)?)
    }
}

pub fn to_switch_clock(t: Nanos, offset: Nanos) -> Option<OfpTime> {
    OfpTime::from_nanos(EPOCH_NS + t as i128 + offset as i128)
}

pub fn from_switch_clock(time: OfpTime, offset: Nanos) -> Nanos {
    (time.as_nanos() - EPOCH_NS - offset as i128) as Nanos
}
