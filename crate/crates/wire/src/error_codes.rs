use std::fmt;

use crate::consts::{OFPET_BAD_REQUEST, OFPET_BUNDLE_FAILED};

/// `ofp_bundle_failed_code`: the base codes plus the three scheduling codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum BundleFailedCode {
    Unknown = 0,
    Eperm = 1,
    BadId = 2,
    BundleExist = 3,
    BundleClosed = 4,
    OutOfBundles = 5,
    BadType = 6,
    BadFlags = 7,
    MsgBadLen = 8,
    MsgBadXid = 9,
    MsgUnsup = 10,
    MsgConflict = 11,
    MsgTooMany = 12,
    MsgFailed = 13,
    Timeout = 14,
    BundleInProgress = 15,
    SchedNotSupported = 16,
    SchedFuture = 17,
    SchedPast = 18,
}

impl BundleFailedCode {
    const ALL: [BundleFailedCode; 19] = [
        Self::Unknown,
        Self::Eperm,
        Self::BadId,
        Self::BundleExist,
        Self::BundleClosed,
        Self::OutOfBundles,
        Self::BadType,
        Self::BadFlags,
        Self::MsgBadLen,
        Self::MsgBadXid,
        Self::MsgUnsup,
        Self::MsgConflict,
        Self::MsgTooMany,
        Self::MsgFailed,
        Self::Timeout,
        Self::BundleInProgress,
        Self::SchedNotSupported,
        Self::SchedFuture,
        Self::SchedPast,
    ];

    pub fn from_u16(v: u16) -> Option<Self> {
        Self::ALL.get(v as usize).copied()
    }
}

/// `ofp_bad_request_code`, only the value this extension adds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum BadRequestCode {
    MultipartBadSched = 16,
}

/// An error a switch reports back, as a valid (type, code) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OfpError {
    BundleFailed(BundleFailedCode),
    BadRequest(BadRequestCode),
}

impl OfpError {
    pub const SCHED_NOT_SUPPORTED: OfpError = OfpError::BundleFailed(BundleFailedCode::SchedNotSupported);
    pub const SCHED_FUTURE: OfpError = OfpError::BundleFailed(BundleFailedCode::SchedFuture);
    pub const SCHED_PAST: OfpError = OfpError::BundleFailed(BundleFailedCode::SchedPast);
    pub const MULTIPART_BAD_SCHED: OfpError = OfpError::BadRequest(BadRequestCode::MultipartBadSched);

    pub fn err_type(&self) -> u16 {
        match self {
            OfpError::BundleFailed(_) => OFPET_BUNDLE_FAILED,
            OfpError::BadRequest(_) => OFPET_BAD_REQUEST,
        }
    }

    pub fn code(&self) -> u16 {
        match self {
            OfpError::BundleFailed(c) => *c as u16,
            OfpError::BadRequest(c) => *c as u16,
        }
    }

    pub fn from_parts(err_type: u16, code: u16) -> Option<Self> {
        match (err_type, code) {
            (OFPET_BUNDLE_FAILED, c) => BundleFailedCode::from_u16(c).map(OfpError::BundleFailed),
            (OFPET_BAD_REQUEST, 16) => Some(OfpError::MULTIPART_BAD_SCHED),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OfpError::BundleFailed(c) => match c {
                BundleFailedCode::Unknown => "OFPBFC_UNKNOWN",
                BundleFailedCode::Eperm => "OFPBFC_EPERM",
                BundleFailedCode::BadId => "OFPBFC_BAD_ID",
                BundleFailedCode::BundleExist => "OFPBFC_BUNDLE_EXIST",
                BundleFailedCode::BundleClosed => "OFPBFC_BUNDLE_CLOSED",
                BundleFailedCode::OutOfBundles => "OFPBFC_OUT_OF_BUNDLES",
                BundleFailedCode::BadType => "OFPBFC_BAD_TYPE",
                BundleFailedCode::BadFlags => "OFPBFC_BAD_FLAGS",
                BundleFailedCode::MsgBadLen => "OFPBFC_MSG_BAD_LEN",
                BundleFailedCode::MsgBadXid => "OFPBFC_MSG_BAD_XID",
                BundleFailedCode::MsgUnsup => "OFPBFC_MSG_UNSUP",
                BundleFailedCode::MsgConflict => "OFPBFC_MSG_CONFLICT",
                BundleFailedCode::MsgTooMany => "OFPBFC_MSG_TOO_MANY",
                BundleFailedCode::MsgFailed => "OFPBFC_MSG_FAILED",
                BundleFailedCode::Timeout => "OFPBFC_TIMEOUT",
                BundleFailedCode::BundleInProgress => "OFPBFC_BUNDLE_IN_PROGRESS",
                BundleFailedCode::SchedNotSupported => "OFPBFC_SCHED_NOT_SUPPORTED",
                BundleFailedCode::SchedFuture => "OFPBFC_SCHED_FUTURE",
                BundleFailedCode::SchedPast => "OFPBFC_SCHED_PAST",
            },
            OfpError::BadRequest(BadRequestCode::MultipartBadSched) => "OFPBRC_MULTIPART_BAD_SCHED",
        }
    }
}

impl fmt::Display for OfpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self {
            OfpError::BundleFailed(_) => "OFPET_BUNDLE_FAILED",
            OfpError::BadRequest(_) => "OFPET_BAD_REQUEST",
        };
        write!(f, "{family}/{} ({})", self.name(), self.code())
    }
}

impl std::error::Error for OfpError {}
