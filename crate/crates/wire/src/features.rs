use std::time::Duration;

use crate::consts::{OFPBF_TIME, OFPBF_TIMESTAMP, OFPBF_TIME_SET_SCHED};
use crate::error_codes::OfpError;
use crate::messages::{BundleFeaturesReply, BundleFeaturesRequest, FeaturesTimeProperty};
use crate::time::OfpTime;
use crate::tolerance::ToleranceConfig;

/// What a switch advertises and how it treats tolerance changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchFeatures {
    /// `ofp_bundle_flags` bitmap; scheduling is advertised through `OFPBF_TIME`.
    pub capabilities: u16,
    pub tolerance: ToleranceConfig,
    pub sched_accuracy: Duration,
    /// Largest tolerance the switch will agree to, either side. `None` refuses every change.
    pub max_tolerance: Option<Duration>,
    /// Controller clock minus switch clock, from the last request that carried a timestamp.
    pub controller_offset_ns: Option<i128>,
}

impl Default for SwitchFeatures {
    fn default() -> Self {
        SwitchFeatures {
            capabilities: crate::consts::OFPBF_ATOMIC | crate::consts::OFPBF_ORDERED | OFPBF_TIME,
            tolerance: ToleranceConfig::default(),
            sched_accuracy: Duration::from_millis(1),
            max_tolerance: Some(Duration::from_secs(3600)),
            controller_offset_ns: None,
        }
    }
}

impl SwitchFeatures {
    pub fn supports_scheduling(&self) -> bool {
        self.capabilities & OFPBF_TIME != 0
    }
}

/// Handles a bundle features request at switch time `now`.
///
/// With `OFPBF_TIME_SET_SCHED` the switch adopts the requested tolerance and echoes it; a
/// refused change yields `OFPBRC_MULTIPART_BAD_SCHED` and leaves the old values in place.
pub fn apply_features_request(
    req: &BundleFeaturesRequest,
    switch: &mut SwitchFeatures,
    now: OfpTime,
) -> Result<BundleFeaturesReply, OfpError> {
    if let Some(prop) = &req.time_property {
        if req.feature_request_flags & OFPBF_TIME_SET_SCHED != 0 {
            let wanted = ToleranceConfig {
                sched_max_future: prop.sched_max_future.to_duration(),
                sched_max_past: prop.sched_max_past.to_duration(),
            };
            let allowed = switch.supports_scheduling()
                && switch
                    .max_tolerance
                    .is_some_and(|max| wanted.sched_max_future <= max && wanted.sched_max_past <= max);
            if !allowed {
                return Err(OfpError::MULTIPART_BAD_SCHED);
            }
            switch.tolerance = wanted;
        }
        if req.feature_request_flags & OFPBF_TIMESTAMP != 0 {
            switch.controller_offset_ns = Some(prop.timestamp.as_nanos() - now.as_nanos());
        }
    }
    let properties = if switch.supports_scheduling() {
        vec![FeaturesTimeProperty {
            sched_accuracy: OfpTime::from_duration(switch.sched_accuracy),
            sched_max_future: OfpTime::from_duration(switch.tolerance.sched_max_future),
            sched_max_past: OfpTime::from_duration(switch.tolerance.sched_max_past),
            timestamp: now,
        }]
    } else {
        Vec::new()
    };
    Ok(BundleFeaturesReply { capabilities: switch.capabilities, properties })
}
