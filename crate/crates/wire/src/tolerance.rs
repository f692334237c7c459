use std::time::Duration;

use crate::error_codes::OfpError;
use crate::time::OfpTime;

/// `sched_max_future` / `sched_max_past`, one second each unless reconfigured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ToleranceConfig {
    pub sched_max_future: Duration,
    pub sched_max_past: Duration,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { sched_max_future: Duration::from_secs(1), sched_max_past: Duration::from_secs(1) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceVerdict {
    /// In the past but within `sched_max_past`: apply as soon as possible.
    ExecuteNow,
    ExecuteAt(OfpTime),
    Reject(OfpError),
}

/// Where a scheduled commit falls relative to the switch's tolerance window. Both window
/// edges are inclusive.
pub fn check_tolerance(now: OfpTime, scheduled: OfpTime, cfg: &ToleranceConfig) -> ToleranceVerdict {
    let now_ns = now.as_nanos();
    let at = scheduled.as_nanos();
    if at < now_ns - cfg.sched_max_past.as_nanos() as i128 {
        ToleranceVerdict::Reject(OfpError::SCHED_PAST)
    } else if at > now_ns + cfg.sched_max_future.as_nanos() as i128 {
        ToleranceVerdict::Reject(OfpError::SCHED_FUTURE)
    } else if at <= now_ns {
        ToleranceVerdict::ExecuteNow
    } else {
        ToleranceVerdict::ExecuteAt(scheduled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: u64, ns: u32) -> OfpTime {
        OfpTime::new(s, ns).unwrap()
    }

    #[test]
    fn defaults_are_one_second() {
        let cfg = ToleranceConfig::default();
        assert_eq!(cfg.sched_max_future, Duration::from_secs(1));
        assert_eq!(cfg.sched_max_past, Duration::from_secs(1));
    }

    #[test]
    fn window() {
        let cfg = ToleranceConfig::default();
        let now = t(100, 0);
        assert_eq!(check_tolerance(now, t(100, 500_000_000), &cfg), ToleranceVerdict::ExecuteAt(t(100, 500_000_000)));
        assert_eq!(check_tolerance(now, t(99, 500_000_000), &cfg), ToleranceVerdict::ExecuteNow);
        assert_eq!(check_tolerance(now, t(102, 0), &cfg), ToleranceVerdict::Reject(OfpError::SCHED_FUTURE));
        assert_eq!(check_tolerance(now, t(98, 999_999_999), &cfg), ToleranceVerdict::Reject(OfpError::SCHED_PAST));
        assert_eq!(check_tolerance(now, now, &cfg), ToleranceVerdict::ExecuteNow);
        assert_eq!(check_tolerance(now, t(101, 0), &cfg), ToleranceVerdict::ExecuteAt(t(101, 0)));
        assert_eq!(check_tolerance(now, t(99, 0), &cfg), ToleranceVerdict::ExecuteNow);
    }

    #[test]
    fn near_epoch() {
        let cfg = ToleranceConfig::default();
        assert_eq!(check_tolerance(t(0, 10), t(0, 0), &cfg), ToleranceVerdict::ExecuteNow);
    }
}
