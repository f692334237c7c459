//! Message layouts: bundle control/add with the time property, bundle features bodies, and
//! error messages carrying the extension codes.

use crate::codec::{Reader, Wire, Writer};
use crate::consts::*;
use crate::error_codes::OfpError;
use crate::time::OfpTime;
use crate::WireError;

/// `struct ofp_header`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfpHeader {
    pub version: u8,
    pub msg_type: u8,
    pub length: u16,
    pub xid: u32,
}

impl OfpHeader {
    pub const SIZE: usize = 8;

    fn write(w: &mut Writer, msg_type: u8, xid: u32) -> usize {
        let at = w.len() + 2;
        w.u8(OFP_VERSION);
        w.u8(msg_type);
        w.u16(0);
        w.u32(xid);
        at
    }

    /// Reads a header and checks version, type and that `length` covers the whole buffer.
    fn read_expecting(r: &mut Reader<'_>, msg_type: u8) -> Result<Self, WireError> {
        let h = r.scoped("header", |r| {
            Ok(OfpHeader { version: r.u8("version")?, msg_type: r.u8("type")?, length: r.u16("length")?, xid: r.u32("xid")? })
        })?;
        if h.version != OFP_VERSION {
            return Err(r.invalid("header.version", format!("expected {OFP_VERSION:#04x}, got {:#04x}", h.version)));
        }
        if h.msg_type != msg_type {
            return Err(r.invalid("header.type", format!("expected {msg_type}, got {}", h.msg_type)));
        }
        let total = OfpHeader::SIZE + r.remaining();
        if h.length as usize != total {
            return Err(r.invalid("header.length", format!("declares {} octets, buffer has {total}", h.length)));
        }
        Ok(h)
    }
}

fn finish_length(w: &mut Writer, at: usize, start: usize, what: &'static str) -> Result<(), WireError> {
    let len = u16::try_from(w.len() - start)
        .map_err(|_| WireError::Encode { what, reason: "message longer than 65535 octets".into() })?;
    w.patch_u16(at, len);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum BundleCtrlType {
    OpenRequest = 0,
    OpenReply = 1,
    CloseRequest = 2,
    CloseReply = 3,
    CommitRequest = 4,
    CommitReply = 5,
    DiscardRequest = 6,
    DiscardReply = 7,
}

impl BundleCtrlType {
    pub const ALL: [BundleCtrlType; 8] = [
        BundleCtrlType::OpenRequest,
        BundleCtrlType::OpenReply,
        BundleCtrlType::CloseRequest,
        BundleCtrlType::CloseReply,
        BundleCtrlType::CommitRequest,
        BundleCtrlType::CommitReply,
        BundleCtrlType::DiscardRequest,
        BundleCtrlType::DiscardReply,
    ];

    pub fn from_u16(v: u16) -> Option<Self> {
        Self::ALL.get(v as usize).copied()
    }

    /// The reply type for a request type.
    pub fn reply(self) -> Option<Self> {
        match self {
            BundleCtrlType::OpenRequest => Some(BundleCtrlType::OpenReply),
            BundleCtrlType::CloseRequest => Some(BundleCtrlType::CloseReply),
            BundleCtrlType::CommitRequest => Some(BundleCtrlType::CommitReply),
            BundleCtrlType::DiscardRequest => Some(BundleCtrlType::DiscardReply),
            _ => None,
        }
    }
}

/// `struct ofp_bundle_prop_time`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeBundleProperty {
    pub scheduled_time: OfpTime,
}

impl TimeBundleProperty {
    pub const SIZE: usize = 24;
}

impl Wire for TimeBundleProperty {
    const NAME: &'static str = "ofp_bundle_prop_time";

    fn write(&self, w: &mut Writer) -> Result<(), WireError> {
        w.u16(OFPBPT_TIME);
        w.u16(Self::SIZE as u16);
        w.pad(4);
        self.scheduled_time.write(w)
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let prop_type = r.u16("type")?;
        if prop_type != OFPBPT_TIME {
            return Err(r.invalid("type", format!("unknown bundle property type {prop_type}")));
        }
        let length = r.u16("length")?;
        if length as usize != Self::SIZE {
            return Err(r.invalid("length", format!("time property length must be 24, got {length}")));
        }
        r.pad(4, "pad")?;
        let scheduled_time = r.scoped("scheduled_time", OfpTime::read)?;
        Ok(TimeBundleProperty { scheduled_time })
    }
}

/// `OFPT_BUNDLE_CONTROL` with the optional time property.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundleControlMsg {
    pub xid: u32,
    pub bundle_id: u32,
    pub ctrl_type: BundleCtrlType,
    pub flags: u16,
    pub time_property: Option<TimeBundleProperty>,
}

impl BundleControlMsg {
    pub const FIXED_SIZE: usize = 16;

    pub fn new(xid: u32, bundle_id: u32, ctrl_type: BundleCtrlType, flags: u16) -> Self {
        BundleControlMsg { xid, bundle_id, ctrl_type, flags: flags & !OFPBF_TIME, time_property: None }
    }

    pub fn scheduled_commit(xid: u32, bundle_id: u32, flags: u16, at: OfpTime) -> Self {
        BundleControlMsg {
            xid,
            bundle_id,
            ctrl_type: BundleCtrlType::CommitRequest,
            flags: flags | OFPBF_TIME,
            time_property: Some(TimeBundleProperty { scheduled_time: at }),
        }
    }

    pub fn scheduled_time(&self) -> Option<OfpTime> {
        self.time_property.map(|p| p.scheduled_time)
    }

    /// The matching reply, or `None` for reply types.
    pub fn reply(&self) -> Option<Self> {
        Some(BundleControlMsg::new(self.xid, self.bundle_id, self.ctrl_type.reply()?, self.flags))
    }

    fn check(&self) -> Result<(), WireError> {
        let timed = self.flags & OFPBF_TIME != 0;
        let what = Self::NAME;
        if self.ctrl_type != BundleCtrlType::CommitRequest {
            if timed {
                return Err(WireError::Encode { what, reason: "OFPBF_TIME is only allowed on commit requests".into() });
            }
            if self.time_property.is_some() {
                return Err(WireError::Encode { what, reason: "time property is only allowed on commit requests".into() });
            }
        } else if timed != self.time_property.is_some() {
            return Err(WireError::Encode {
                what,
                reason: "OFPBF_TIME and the time property must appear together".into(),
            });
        }
        Ok(())
    }
}

impl Wire for BundleControlMsg {
    const NAME: &'static str = "ofp_bundle_ctrl_msg";

    fn write(&self, w: &mut Writer) -> Result<(), WireError> {
        self.check()?;
        let start = w.len();
        let at = OfpHeader::write(w, OFPT_BUNDLE_CONTROL, self.xid);
        w.u32(self.bundle_id);
        w.u16(self.ctrl_type as u16);
        w.u16(self.flags);
        if let Some(p) = &self.time_property {
            p.write(w)?;
        }
        finish_length(w, at, start, Self::NAME)
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let header = OfpHeader::read_expecting(r, OFPT_BUNDLE_CONTROL)?;
        let bundle_id = r.u32("bundle_id")?;
        let raw_type = r.u16("type")?;
        let ctrl_type =
            BundleCtrlType::from_u16(raw_type).ok_or_else(|| r.invalid("type", format!("unknown control type {raw_type}")))?;
        let mut flags = r.u16("flags")?;
        let mut time_property = None;
        while r.remaining() > 0 {
            let prop = r.scoped("properties", TimeBundleProperty::read)?;
            if time_property.replace(prop).is_some() {
                return Err(r.invalid("properties", "duplicate time property"));
            }
        }
        if ctrl_type == BundleCtrlType::CommitRequest {
            let timed = flags & OFPBF_TIME != 0;
            if timed && time_property.is_none() {
                return Err(r.invalid("properties", "scheduled commit without a time property"));
            }
            if !timed && time_property.is_some() {
                return Err(r.invalid("flags", "time property present but OFPBF_TIME is clear"));
            }
        } else {
            if flags & OFPBF_TIME != 0 {
                log::debug!("ignoring OFPBF_TIME on {ctrl_type:?}");
                flags &= !OFPBF_TIME;
            }
            if time_property.is_some() {
                return Err(r.invalid("properties", "time property on a message that is not a commit request"));
            }
        }
        Ok(BundleControlMsg { xid: header.xid, bundle_id, ctrl_type, flags, time_property })
    }
}

/// `OFPT_BUNDLE_ADD_MESSAGE`. The inner OpenFlow message is carried opaquely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleAddMsg {
    pub xid: u32,
    pub bundle_id: u32,
    pub flags: u16,
    pub message: Vec<u8>,
}

impl BundleAddMsg {
    pub const FIXED_SIZE: usize = 16;

    fn check_inner(message: &[u8]) -> Result<(), String> {
        if message.len() < OfpHeader::SIZE {
            return Err(format!("inner message is {} octets, shorter than a header", message.len()));
        }
        let declared = u16::from_be_bytes([message[2], message[3]]) as usize;
        if declared != message.len() {
            return Err(format!("inner message declares {declared} octets, carries {}", message.len()));
        }
        Ok(())
    }
}

impl Wire for BundleAddMsg {
    const NAME: &'static str = "ofp_bundle_add_msg";

    fn write(&self, w: &mut Writer) -> Result<(), WireError> {
        Self::check_inner(&self.message).map_err(|reason| WireError::Encode { what: Self::NAME, reason })?;
        let start = w.len();
        let at = OfpHeader::write(w, OFPT_BUNDLE_ADD_MESSAGE, self.xid);
        w.u32(self.bundle_id);
        w.pad(2);
        w.u16(self.flags);
        w.bytes(&self.message);
        finish_length(w, at, start, Self::NAME)
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let header = OfpHeader::read_expecting(r, OFPT_BUNDLE_ADD_MESSAGE)?;
        let bundle_id = r.u32("bundle_id")?;
        r.pad(2, "pad")?;
        let flags = r.u16("flags")?;
        let message = r.bytes(r.remaining(), "message")?.to_vec();
        Self::check_inner(&message).map_err(|reason| r.invalid("message", reason))?;
        Ok(BundleAddMsg { xid: header.xid, bundle_id, flags, message })
    }
}

/// `struct ofp_bundle_features_prop_header`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeaturesPropHeader {
    pub prop_type: u16,
    pub length: u16,
}

impl FeaturesPropHeader {
    pub const SIZE: usize = 4;
}

impl Wire for FeaturesPropHeader {
    const NAME: &'static str = "ofp_bundle_features_prop_header";

    fn write(&self, w: &mut Writer) -> Result<(), WireError> {
        w.u16(self.prop_type);
        w.u16(self.length);
        Ok(())
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(FeaturesPropHeader { prop_type: r.u16("type")?, length: r.u16("length")? })
    }
}

/// `struct ofp_bundle_features_prop_time`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeaturesTimeProperty {
    /// Meaningful in replies only.
    pub sched_accuracy: OfpTime,
    pub sched_max_future: OfpTime,
    pub sched_max_past: OfpTime,
    pub timestamp: OfpTime,
}

impl FeaturesTimeProperty {
    pub const SIZE: usize = 72;
}

impl Wire for FeaturesTimeProperty {
    const NAME: &'static str = "ofp_bundle_features_prop_time";

    fn write(&self, w: &mut Writer) -> Result<(), WireError> {
        FeaturesPropHeader { prop_type: OFPTMPBF_TIME_CAPABILITY, length: Self::SIZE as u16 }.write(w)?;
        w.pad(4);
        self.sched_accuracy.write(w)?;
        self.sched_max_future.write(w)?;
        self.sched_max_past.write(w)?;
        self.timestamp.write(w)
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let h = FeaturesPropHeader::read(r)?;
        if h.prop_type != OFPTMPBF_TIME_CAPABILITY {
            return Err(r.invalid("type", format!("unknown bundle features property type {:#06x}", h.prop_type)));
        }
        if h.length as usize != Self::SIZE {
            return Err(r.invalid("length", format!("time property length must be 72, got {}", h.length)));
        }
        r.pad(4, "pad")?;
        Ok(FeaturesTimeProperty {
            sched_accuracy: r.scoped("sched_accuracy", OfpTime::read)?,
            sched_max_future: r.scoped("sched_max_future", OfpTime::read)?,
            sched_max_past: r.scoped("sched_max_past", OfpTime::read)?,
            timestamp: r.scoped("timestamp", OfpTime::read)?,
        })
    }
}

/// Body of an `OFPMP_BUNDLE_FEATURES` request.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BundleFeaturesRequest {
    pub feature_request_flags: u32,
    pub time_property: Option<FeaturesTimeProperty>,
}

impl BundleFeaturesRequest {
    pub const FIXED_SIZE: usize = 8;

    fn wants_property(flags: u32) -> bool {
        flags & (OFPBF_TIMESTAMP | OFPBF_TIME_SET_SCHED) != 0
    }
}

impl Wire for BundleFeaturesRequest {
    const NAME: &'static str = "ofp_bundle_features_request";

    fn write(&self, w: &mut Writer) -> Result<(), WireError> {
        if Self::wants_property(self.feature_request_flags) != self.time_property.is_some() {
            return Err(WireError::Encode {
                what: Self::NAME,
                reason: "time property must be present exactly when OFPBF_TIMESTAMP or OFPBF_TIME_SET_SCHED is set"
                    .into(),
            });
        }
        w.u32(self.feature_request_flags);
        w.pad(4);
        if let Some(p) = &self.time_property {
            p.write(w)?;
        }
        Ok(())
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let feature_request_flags = r.u32("feature_request_flags")?;
        r.pad(4, "pad")?;
        let time_property = if r.remaining() > 0 {
            Some(r.scoped("properties", FeaturesTimeProperty::read)?)
        } else {
            None
        };
        if Self::wants_property(feature_request_flags) != time_property.is_some() {
            return Err(r.invalid("properties", "time property presence does not match the request flags"));
        }
        Ok(BundleFeaturesRequest { feature_request_flags, time_property })
    }
}

/// Body of an `OFPMP_BUNDLE_FEATURES` reply.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BundleFeaturesReply {
    pub capabilities: u16,
    pub properties: Vec<FeaturesTimeProperty>,
}

impl BundleFeaturesReply {
    pub const FIXED_SIZE: usize = 8;

    pub fn time_property(&self) -> Option<&FeaturesTimeProperty> {
        self.properties.first()
    }
}

impl Wire for BundleFeaturesReply {
    const NAME: &'static str = "ofp_bundle_features";

    fn write(&self, w: &mut Writer) -> Result<(), WireError> {
        if (self.capabilities & OFPBF_TIME != 0) != !self.properties.is_empty() {
            return Err(WireError::Encode {
                what: Self::NAME,
                reason: "a reply carries time properties exactly when OFPBF_TIME is advertised".into(),
            });
        }
        w.u16(self.capabilities);
        w.pad(6);
        for p in &self.properties {
            p.write(w)?;
        }
        Ok(())
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let capabilities = r.u16("capabilities")?;
        r.pad(6, "pad")?;
        let mut properties = Vec::new();
        while r.remaining() > 0 {
            properties.push(r.scoped("properties", FeaturesTimeProperty::read)?);
        }
        if (capabilities & OFPBF_TIME != 0) != !properties.is_empty() {
            return Err(r.invalid("properties", "time properties present exactly when OFPBF_TIME is advertised"));
        }
        Ok(BundleFeaturesReply { capabilities, properties })
    }
}

/// `OFPT_ERROR` with one of the codes this crate knows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorMsg {
    pub xid: u32,
    pub error: OfpError,
    /// At least the first 64 octets of the offending request, by convention.
    pub data: Vec<u8>,
}

impl Wire for ErrorMsg {
    const NAME: &'static str = "ofp_error_msg";

    fn write(&self, w: &mut Writer) -> Result<(), WireError> {
        let start = w.len();
        let at = OfpHeader::write(w, OFPT_ERROR, self.xid);
        w.u16(self.error.err_type());
        w.u16(self.error.code());
        w.bytes(&self.data);
        finish_length(w, at, start, Self::NAME)
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let header = OfpHeader::read_expecting(r, OFPT_ERROR)?;
        let err_type = r.u16("type")?;
        let code = r.u16("code")?;
        let error = OfpError::from_parts(err_type, code)
            .ok_or_else(|| r.invalid("code", format!("unknown error type/code {err_type}/{code}")))?;
        let data = r.bytes(r.remaining(), "data")?.to_vec();
        Ok(ErrorMsg { xid: header.xid, error, data })
    }
}
