use std::fmt;
use std::time::Duration;

use crate::codec::{Reader, Wire, Writer};
use crate::WireError;

pub const NANOS_PER_SEC: u32 = 1_000_000_000;

/// `struct ofp_time`: TAI seconds since 1970 plus nanoseconds, 4 pad octets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OfpTime {
    pub seconds: u64,
    pub nanoseconds: u32,
}

impl OfpTime {
    pub const SIZE: usize = 16;

    pub fn new(seconds: u64, nanoseconds: u32) -> Result<Self, WireError> {
        let t = OfpTime { seconds, nanoseconds };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), WireError> {
        if self.nanoseconds >= NANOS_PER_SEC {
            return Err(WireError::Nanoseconds(self.nanoseconds));
        }
        Ok(())
    }

    /// Total nanoseconds. Wide enough for every representable value.
    pub fn as_nanos(&self) -> i128 {
        self.seconds as i128 * NANOS_PER_SEC as i128 + self.nanoseconds as i128
    }

    /// `None` when `nanos` is negative or past `u64::MAX` seconds.
    pub fn from_nanos(nanos: i128) -> Option<Self> {
        if nanos < 0 {
            return None;
        }
        let seconds = u64::try_from(nanos / NANOS_PER_SEC as i128).ok()?;
        Some(OfpTime { seconds, nanoseconds: (nanos % NANOS_PER_SEC as i128) as u32 })
    }

    pub fn from_duration(d: Duration) -> Self {
        OfpTime { seconds: d.as_secs(), nanoseconds: d.subsec_nanos() }
    }

    pub fn to_duration(&self) -> Duration {
        Duration::new(self.seconds, self.nanoseconds)
    }

    pub fn checked_add(&self, d: Duration) -> Option<Self> {
        Self::from_nanos(self.as_nanos() + d.as_nanos() as i128)
    }

    pub fn checked_sub(&self, d: Duration) -> Option<Self> {
        Self::from_nanos(self.as_nanos() - d.as_nanos() as i128)
    }

    /// Shifts by a signed nanosecond offset, as used for per-switch clock correction.
    pub fn offset_by(&self, nanos: i64) -> Option<Self> {
        Self::from_nanos(self.as_nanos() + nanos as i128)
    }
}

impl fmt::Display for OfpTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:09}", self.seconds, self.nanoseconds)
    }
}

impl Wire for OfpTime {
    const NAME: &'static str = "ofp_time";

    fn write(&self, w: &mut Writer) -> Result<(), WireError> {
        self.validate()?;
        w.u64(self.seconds);
        w.u32(self.nanoseconds);
        w.pad(4);
        Ok(())
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let seconds = r.u64("seconds")?;
        let nanoseconds = r.u32("nanoseconds")?;
        r.pad(4, "pad")?;
        OfpTime::new(seconds, nanoseconds).map_err(|e| r.fail("nanoseconds", e))
    }
}
