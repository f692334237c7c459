//! Protocol numbers. Flags are grouped by the message family they belong to, since the
//! bundle flags and the bundle-features request flags reuse the `OFPBF_` prefix.

/// OpenFlow 1.5, where bundles are part of the base protocol.
pub const OFP_VERSION: u8 = 0x06;

pub const OFPT_ERROR: u8 = 1;
pub const OFPT_BUNDLE_CONTROL: u8 = 33;
pub const OFPT_BUNDLE_ADD_MESSAGE: u8 = 34;

pub const OFPMP_BUNDLE_FEATURES: u16 = 17;

// ofp_bundle_flags
pub const OFPBF_ATOMIC: u16 = 1 << 0;
pub const OFPBF_ORDERED: u16 = 1 << 1;
pub const OFPBF_TIME: u16 = 1 << 2;

// ofp_bundle_feature_flags (request only)
pub const OFPBF_TIMESTAMP: u32 = 1 << 0;
pub const OFPBF_TIME_SET_SCHED: u32 = 1 << 1;

pub const OFPBPT_TIME: u16 = 1;

pub const OFPTMPBF_TIME_CAPABILITY: u16 = 0x1;
pub const OFPTMPBF_EXPERIMENTER: u16 = 0xFFFF;

pub const OFPET_BAD_REQUEST: u16 = 1;
pub const OFPET_BUNDLE_FAILED: u16 = 17;
