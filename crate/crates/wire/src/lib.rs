//! Wire format and switch-side semantics for time-scheduled OpenFlow bundles.
//!
//! All multi-octet fields are big-endian. Every message type implements [`Wire`].

pub mod codec;
pub mod consts;
pub mod error_codes;
pub mod features;
pub mod messages;
pub mod session;
pub mod time;
pub mod tolerance;

pub use codec::{Reader, Wire, Writer};
pub use error_codes::{BadRequestCode, BundleFailedCode, OfpError};
pub use features::{apply_features_request, SwitchFeatures};
pub use messages::{
    BundleAddMsg, BundleControlMsg, BundleCtrlType, BundleFeaturesReply, BundleFeaturesRequest, ErrorMsg,
    FeaturesPropHeader, FeaturesTimeProperty, OfpHeader, TimeBundleProperty,
};
pub use session::{BundleSession, BundleState, Executed, SessionConfig};
pub use time::OfpTime;
pub use tolerance::{check_tolerance, ToleranceConfig, ToleranceVerdict};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("nanoseconds field {0} is not below 10^9")]
    Nanoseconds(u32),
    #[error("{path}: buffer ends at offset {offset}, {needed} more octets needed")]
    Truncated { path: String, offset: usize, needed: usize },
    #[error("{extra} trailing octets after offset {offset}")]
    Trailing { offset: usize, extra: usize },
    #[error("{path} at offset {offset}: {reason}")]
    Invalid { path: String, offset: usize, reason: String },
    #[error("cannot encode {what}: {reason}")]
    Encode { what: &'static str, reason: String },
}
