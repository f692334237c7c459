use std::fmt::Write as _;
use std::io::Write;

use clap::{Args, Subcommand, ValueEnum};
use time4_wire::consts::*;
use time4_wire::{
    BundleAddMsg, BundleControlMsg, BundleCtrlType, BundleFeaturesReply, BundleFeaturesRequest, ErrorMsg,
    FeaturesTimeProperty, OfpError, OfpTime, TimeBundleProperty, Wire, WireError,
};

use crate::exit;
use crate::units::parse_time;

#[derive(Debug, Clone, Args)]
pub struct CodecArgs {
    #[command(subcommand)]
    pub action: CodecAction,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CodecAction {
    /// Decode hex (whitespace and `#` comments ignored).
    Decode {
        hex: String,
        #[arg(long, value_enum, default_value_t = Kind::Auto)]
        kind: Kind,
        /// Print one line per field with its offset and octets.
        #[arg(long)]
        explain: bool,
    },
    /// Build a message and print its hex.
    Encode {
        #[command(subcommand)]
        message: EncodeMessage,
        #[arg(long, global = true)]
        explain: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Auto,
    Time,
    PropTime,
    Control,
    Add,
    FeaturesRequest,
    FeaturesReply,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CtrlType {
    Open,
    OpenReply,
    Close,
    CloseReply,
    Commit,
    CommitReply,
    Discard,
    DiscardReply,
}

#[derive(Debug, Clone, Subcommand)]
pub enum EncodeMessage {
    /// `ofp_time`.
    Time {
        #[arg(long, value_parser = parse_time)]
        at: OfpTime,
    },
    /// Bundle time property.
    PropTime {
        #[arg(long, value_parser = parse_time)]
        at: OfpTime,
    },
    /// Bundle control message; `--at` makes a scheduled commit.
    Control {
        #[arg(long = "type", value_enum)]
        ctrl_type: CtrlType,
        #[arg(long, default_value_t = 0)]
        xid: u32,
        #[arg(long, default_value_t = 1)]
        bundle_id: u32,
        #[arg(long, default_value_t = OFPBF_ATOMIC)]
        flags: u16,
        #[arg(long, value_parser = parse_time)]
        at: Option<OfpTime>,
    },
    /// Bundle add message around an inner message given in hex.
    Add {
        #[arg(long, default_value_t = 0)]
        xid: u32,
        #[arg(long, default_value_t = 1)]
        bundle_id: u32,
        #[arg(long, default_value_t = OFPBF_ATOMIC)]
        flags: u16,
        #[arg(long)]
        message: String,
    },
    /// Bundle features request body; the time property follows the flags.
    FeaturesRequest {
        #[arg(long, default_value_t = 0)]
        flags: u32,
        #[arg(long, value_parser = parse_time, default_value = "0")]
        timestamp: OfpTime,
        #[arg(long, value_parser = parse_time, default_value = "1")]
        max_future: OfpTime,
        #[arg(long, value_parser = parse_time, default_value = "1")]
        max_past: OfpTime,
    },
    /// Bundle features reply body; properties appear when OFPBF_TIME is advertised.
    FeaturesReply {
        #[arg(long, default_value_t = OFPBF_ATOMIC | OFPBF_ORDERED | OFPBF_TIME)]
        capabilities: u16,
        #[arg(long, value_parser = parse_time, default_value = "0.001")]
        accuracy: OfpTime,
        #[arg(long, value_parser = parse_time, default_value = "1")]
        max_future: OfpTime,
        #[arg(long, value_parser = parse_time, default_value = "1")]
        max_past: OfpTime,
        #[arg(long, value_parser = parse_time, default_value = "0")]
        timestamp: OfpTime,
    },
    /// Error message, by code name such as `sched-past` or `OFPBFC_SCHED_FUTURE`.
    Error {
        #[arg(long, value_parser = parse_error_code)]
        code: OfpError,
        #[arg(long, default_value_t = 0)]
        xid: u32,
        #[arg(long, default_value = "")]
        data: String,
    },
}

fn parse_error_code(s: &str) -> Result<OfpError, String> {
    let want = s.trim().to_ascii_uppercase().replace('-', "_");
    let all = (0..=18u16)
        .filter_map(|c| OfpError::from_parts(OFPET_BUNDLE_FAILED, c))
        .chain(OfpError::from_parts(OFPET_BAD_REQUEST, 16));
    for e in all {
        let name = e.name();
        if name == want || name.split_once('_').is_some_and(|(_, short)| short == want) {
            return Ok(e);
        }
    }
    Err(format!("unknown error code {s:?}"))
}

impl CtrlType {
    fn wire(self) -> BundleCtrlType {
        BundleCtrlType::ALL[self as usize]
    }
}

/// Strips whitespace, `#` comments and an optional `0x`, then decodes.
pub fn parse_hex(text: &str) -> Result<Vec<u8>, String> {
    let mut digits = String::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        digits.extend(line.chars().filter(|c| !c.is_whitespace()));
    }
    let digits = digits.strip_prefix("0x").unwrap_or(&digits);
    hex::decode(digits).map_err(|e| format!("malformed hex: {e}"))
}

/// A decoded message of any supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    Time(OfpTime),
    PropTime(TimeBundleProperty),
    Control(BundleControlMsg),
    Add(BundleAddMsg),
    FeaturesRequest(BundleFeaturesRequest),
    FeaturesReply(BundleFeaturesReply),
    Error(ErrorMsg),
}

pub fn decode(bytes: &[u8], kind: Kind) -> Result<Decoded, String> {
    let wire = |e: WireError| e.to_string();
    Ok(match kind {
        Kind::Time => Decoded::Time(OfpTime::decode(bytes).map_err(wire)?),
        Kind::PropTime => Decoded::PropTime(TimeBundleProperty::decode(bytes).map_err(wire)?),
        Kind::Control => Decoded::Control(BundleControlMsg::decode(bytes).map_err(wire)?),
        Kind::Add => Decoded::Add(BundleAddMsg::decode(bytes).map_err(wire)?),
        Kind::FeaturesRequest => Decoded::FeaturesRequest(BundleFeaturesRequest::decode(bytes).map_err(wire)?),
        Kind::FeaturesReply => Decoded::FeaturesReply(BundleFeaturesReply::decode(bytes).map_err(wire)?),
        Kind::Error => Decoded::Error(ErrorMsg::decode(bytes).map_err(wire)?),
        Kind::Auto => return decode(bytes, detect(bytes)?),
    })
}

/// Picks a kind from the header or the property type and length.
fn detect(bytes: &[u8]) -> Result<Kind, String> {
    if bytes.len() >= 8 && bytes[0] == OFP_VERSION {
        match bytes[1] {
            OFPT_BUNDLE_CONTROL => return Ok(Kind::Control),
            OFPT_BUNDLE_ADD_MESSAGE => return Ok(Kind::Add),
            OFPT_ERROR => return Ok(Kind::Error),
            _ => {}
        }
    }
    if bytes.len() >= 4 && bytes[..4] == [0, OFPBPT_TIME as u8, 0, TimeBundleProperty::SIZE as u8] {
        return Ok(Kind::PropTime);
    }
    if bytes.len() == OfpTime::SIZE {
        return Ok(Kind::Time);
    }
    let request = BundleFeaturesRequest::decode(bytes).is_ok();
    let reply = BundleFeaturesReply::decode(bytes).is_ok();
    match (request, reply) {
        (true, false) => Ok(Kind::FeaturesRequest),
        (false, true) => Ok(Kind::FeaturesReply),
        _ => Err("cannot tell the message kind; pass --kind".into()),
    }
}

pub fn encode(message: &EncodeMessage) -> Result<(Vec<u8>, Kind), String> {
    let wire = |e: WireError| e.to_string();
    Ok(match message {
        EncodeMessage::Time { at } => (at.encode().map_err(wire)?, Kind::Time),
        EncodeMessage::PropTime { at } => (TimeBundleProperty { scheduled_time: *at }.encode().map_err(wire)?, Kind::PropTime),
        EncodeMessage::Control { ctrl_type, xid, bundle_id, flags, at } => {
            let msg = match at {
                Some(t) if *ctrl_type == CtrlType::Commit => BundleControlMsg::scheduled_commit(*xid, *bundle_id, *flags, *t),
                Some(_) => return Err("--at applies to commit only".into()),
                None => BundleControlMsg { flags: *flags, ..BundleControlMsg::new(*xid, *bundle_id, ctrl_type.wire(), 0) },
            };
            (msg.encode().map_err(wire)?, Kind::Control)
        }
        EncodeMessage::Add { xid, bundle_id, flags, message } => {
            let msg = BundleAddMsg { xid: *xid, bundle_id: *bundle_id, flags: *flags, message: parse_hex(message)? };
            (msg.encode().map_err(wire)?, Kind::Add)
        }
        EncodeMessage::FeaturesRequest { flags, timestamp, max_future, max_past } => {
            let time_property = (flags & (OFPBF_TIMESTAMP | OFPBF_TIME_SET_SCHED) != 0).then_some(FeaturesTimeProperty {
                sched_accuracy: OfpTime::default(),
                sched_max_future: *max_future,
                sched_max_past: *max_past,
                timestamp: *timestamp,
            });
            let msg = BundleFeaturesRequest { feature_request_flags: *flags, time_property };
            (msg.encode().map_err(wire)?, Kind::FeaturesRequest)
        }
        EncodeMessage::FeaturesReply { capabilities, accuracy, max_future, max_past, timestamp } => {
            let properties = if capabilities & OFPBF_TIME != 0 {
                vec![FeaturesTimeProperty {
                    sched_accuracy: *accuracy,
                    sched_max_future: *max_future,
                    sched_max_past: *max_past,
                    timestamp: *timestamp,
                }]
            } else {
                Vec::new()
            };
            let msg = BundleFeaturesReply { capabilities: *capabilities, properties };
            (msg.encode().map_err(wire)?, Kind::FeaturesReply)
        }
        EncodeMessage::Error { code, xid, data } => {
            let msg = ErrorMsg { xid: *xid, error: *code, data: parse_hex(data)? };
            (msg.encode().map_err(wire)?, Kind::Error)
        }
    })
}

/// Field-by-field listing: offset, octets, name and value.
struct Explainer<'a> {
    bytes: &'a [u8],
    out: String,
}

impl Explainer<'_> {
    fn field(&mut self, at: usize, len: usize, name: &str, value: impl std::fmt::Display) {
        let end = (at + len).min(self.bytes.len());
        let raw = hex::encode(&self.bytes[at.min(end)..end]);
        let _ = writeln!(self.out, "{at:>4}  {len:>3}  {raw:<20}  {name} = {value}");
    }

    fn time(&mut self, at: usize, name: &str, t: &OfpTime) {
        self.field(at, 8, &format!("{name}.seconds"), t.seconds);
        self.field(at + 8, 4, &format!("{name}.nanoseconds"), t.nanoseconds);
        self.field(at + 12, 4, &format!("{name}.pad"), "");
    }

    fn header(&mut self, what: &str, xid: u32) {
        self.field(0, 1, "header.version", format!("{:#04x}", self.bytes[0]));
        self.field(1, 1, "header.type", format!("{} ({what})", self.bytes[1]));
        self.field(2, 2, "header.length", u16::from_be_bytes([self.bytes[2], self.bytes[3]]));
        self.field(4, 4, "header.xid", xid);
    }

    fn prop_time(&mut self, at: usize, p: &TimeBundleProperty) {
        self.field(at, 2, "prop.type", "1 (OFPBPT_TIME)");
        self.field(at + 2, 2, "prop.length", TimeBundleProperty::SIZE);
        self.field(at + 4, 4, "prop.pad", "");
        self.time(at + 8, "prop.scheduled_time", &p.scheduled_time);
    }

    fn features_prop(&mut self, at: usize, p: &FeaturesTimeProperty) {
        self.field(at, 2, "prop.type", "1 (OFPTMPBF_TIME_CAPABILITY)");
        self.field(at + 2, 2, "prop.length", FeaturesTimeProperty::SIZE);
        self.field(at + 4, 4, "prop.pad", "");
        self.time(at + 8, "prop.sched_accuracy", &p.sched_accuracy);
        self.time(at + 24, "prop.sched_max_future", &p.sched_max_future);
        self.time(at + 40, "prop.sched_max_past", &p.sched_max_past);
        self.time(at + 56, "prop.timestamp", &p.timestamp);
    }
}

fn flag_names(flags: u16) -> String {
    let mut names: Vec<&str> = [(OFPBF_ATOMIC, "ATOMIC"), (OFPBF_ORDERED, "ORDERED"), (OFPBF_TIME, "TIME")]
        .iter()
        .filter(|(bit, _)| flags & bit != 0)
        .map(|(_, n)| *n)
        .collect();
    if names.is_empty() {
        names.push("none");
    }
    format!("{flags:#06x} ({})", names.join("|"))
}

pub fn explain(bytes: &[u8], decoded: &Decoded) -> String {
    let mut x = Explainer { bytes, out: String::new() };
    let _ = writeln!(x.out, " off  len  octets                field");
    match decoded {
        Decoded::Time(t) => x.time(0, "ofp_time", t),
        Decoded::PropTime(p) => x.prop_time(0, p),
        Decoded::Control(m) => {
            x.header("OFPT_BUNDLE_CONTROL", m.xid);
            x.field(8, 4, "bundle_id", m.bundle_id);
            x.field(12, 2, "type", format!("{:?}", m.ctrl_type));
            x.field(14, 2, "flags", flag_names(m.flags));
            if let Some(p) = &m.time_property {
                x.prop_time(16, p);
            }
        }
        Decoded::Add(m) => {
            x.header("OFPT_BUNDLE_ADD_MESSAGE", m.xid);
            x.field(8, 4, "bundle_id", m.bundle_id);
            x.field(12, 2, "pad", "");
            x.field(14, 2, "flags", flag_names(m.flags));
            x.field(16, m.message.len(), "message", format!("{} octets", m.message.len()));
        }
        Decoded::FeaturesRequest(m) => {
            x.field(0, 4, "feature_request_flags", format!("{:#010x}", m.feature_request_flags));
            x.field(4, 4, "pad", "");
            if let Some(p) = &m.time_property {
                x.features_prop(8, p);
            }
        }
        Decoded::FeaturesReply(m) => {
            x.field(0, 2, "capabilities", flag_names(m.capabilities));
            x.field(2, 6, "pad", "");
            for (i, p) in m.properties.iter().enumerate() {
                x.features_prop(8 + i * FeaturesTimeProperty::SIZE, p);
            }
        }
        Decoded::Error(m) => {
            x.header("OFPT_ERROR", m.xid);
            x.field(8, 2, "type", m.error.err_type());
            x.field(10, 2, "code", format!("{} ({})", m.error.code(), m.error.name()));
            x.field(12, m.data.len(), "data", format!("{} octets", m.data.len()));
        }
    }
    let _ = writeln!(x.out, "total {} octets", bytes.len());
    x.out
}

pub fn summary(decoded: &Decoded, len: usize) -> String {
    match decoded {
        Decoded::Time(t) => format!("ofp_time {t} ({len} octets)"),
        Decoded::PropTime(p) => format!("ofp_bundle_prop_time length {len}, scheduled_time {}", p.scheduled_time),
        Decoded::Control(m) => {
            let at = m.scheduled_time().map(|t| format!(", scheduled at {t}")).unwrap_or_default();
            format!(
                "ofp_bundle_ctrl_msg {:?} xid {} bundle {} flags {}{at} ({len} octets)",
                m.ctrl_type,
                m.xid,
                m.bundle_id,
                flag_names(m.flags)
            )
        }
        Decoded::Add(m) => {
            format!("ofp_bundle_add_msg xid {} bundle {} inner message {} octets ({len} octets)", m.xid, m.bundle_id, m.message.len())
        }
        Decoded::FeaturesRequest(m) => format!(
            "bundle features request flags {:#010x}, time property {} ({len} octets)",
            m.feature_request_flags,
            if m.time_property.is_some() { "present" } else { "absent" }
        ),
        Decoded::FeaturesReply(m) => format!(
            "bundle features reply capabilities {}, {} time propert{} ({len} octets)",
            flag_names(m.capabilities),
            m.properties.len(),
            if m.properties.len() == 1 { "y" } else { "ies" }
        ),
        Decoded::Error(m) => format!("ofp_error_msg {} xid {} with {} data octets ({len} octets)", m.error, m.xid, m.data.len()),
    }
}

pub fn run(args: &CodecArgs, stdout: &mut dyn Write) -> u8 {
    let result = match &args.action {
        CodecAction::Decode { hex, kind, explain: ex } => match parse_hex(hex) {
            Err(e) => {
                eprintln!("error: {e}");
                return exit::USAGE;
            }
            Ok(bytes) => match decode(&bytes, *kind) {
                Err(e) => {
                    eprintln!("decode error: {e}");
                    return exit::REFUTED;
                }
                Ok(d) if *ex => write!(stdout, "{}", explain(&bytes, &d)),
                Ok(d) => writeln!(stdout, "{}", summary(&d, bytes.len())),
            },
        },
        CodecAction::Encode { message, explain: ex } => match encode(message) {
            Err(e) => {
                eprintln!("encode error: {e}");
                return exit::USAGE;
            }
            Ok((bytes, kind)) => {
                let decoded = decode(&bytes, kind).expect("encoded messages decode");
                let mut text = hex::encode(&bytes) + "\n";
                if *ex {
                    text.push_str(&explain(&bytes, &decoded));
                }
                write!(stdout, "{text}")
            }
        },
    };
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit::REFUTED
        }
    }
}
