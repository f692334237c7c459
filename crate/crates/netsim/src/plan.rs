use time4_wire::{OfpTime, ToleranceConfig};

use crate::{ClockRegistry, Nanos, Rate, SimError};

/// New egress edge per flow.
pub type Changes = Vec<(u32, usize)>;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// Untimed rule change, effective after the installation latency.
    FlowMod { at: Nanos, switch: usize, changes: Changes, latency: Option<Nanos> },
    /// OPEN, ADDs and COMMIT sent back to back. `scheduled` is on the switch's clock.
    Bundle { at: Nanos, switch: usize, bundle_id: u32, changes: Changes, scheduled: Option<OfpTime>, error: Option<Nanos> },
    /// Source-side rate change; takes effect immediately.
    SetRate { at: Nanos, flow: u32, rate: Rate },
}

impl Command {
    pub fn at(&self) -> Nanos {
        match self {
            Command::FlowMod { at, .. } | Command::Bundle { at, .. } | Command::SetRate { at, .. } => *at,
        }
    }

    pub fn switch(&self) -> Option<usize> {
        match self {
            Command::FlowMod { switch, .. } | Command::Bundle { switch, .. } => Some(*switch),
            Command::SetRate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Plan {
    pub commands: Vec<Command>,
    /// Discard every pending bundle as soon as one switch rejects its commit.
    pub all_or_none: bool,
    /// Tolerance pushed to every switch with a features request before the first command.
    pub tolerance: Option<ToleranceConfig>,
}

impl Plan {
    pub fn validate(&self, switches: usize) -> Result<(), SimError> {
        for c in &self.commands {
            if c.at() < 0 {
                return Err(SimError::Plan("command before time zero".into()));
            }
            if let Some(s) = c.switch() {
                if s >= switches {
                    return Err(SimError::UnknownSwitch(s));
                }
            }
            match c {
                Command::FlowMod { latency: Some(l), .. } | Command::Bundle { error: Some(l), .. } if *l < 0 => {
                    return Err(SimError::Plan("negative injected delay".into()));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedUpdate {
    pub switch: usize,
    pub changes: Changes,
}

/// One scheduled bundle per switch, sent `gap` apart from `first_send`, each carrying
/// T_s corrected by that switch's estimated offset.
pub fn schedule_timed_update(
    estimates: &ClockRegistry,
    updates: &[TimedUpdate],
    t_s: Nanos,
    first_send: Nanos,
    gap: Nanos,
) -> Result<Plan, SimError> {
    let mut commands = Vec::with_capacity(updates.len());
    for (i, u) in updates.iter().enumerate() {
        let scheduled = estimates.switch_time(u.switch, t_s).ok_or(SimError::UnknownSwitch(u.switch))?;
        commands.push(Command::Bundle {
            at: first_send + gap * i as Nanos,
            switch: u.switch,
            bundle_id: i as u32 + 1,
            changes: u.changes.clone(),
            scheduled: Some(scheduled),
            error: None,
        });
    }
    Ok(Plan { commands, all_or_none: true, tolerance: None })
}

const OFPT_FLOW_MOD: u8 = 14;
const FLOW_MOD_LEN: usize = 16;

/// A minimal inner message: header, flow id, egress edge.
pub fn encode_flow_mod(xid: u32, flow: u32, edge: usize) -> Vec<u8> {
    let mut m = Vec::with_capacity(FLOW_MOD_LEN);
    m.push(time4_wire::consts::OFP_VERSION);
    m.push(OFPT_FLOW_MOD);
    m.extend_from_slice(&(FLOW_MOD_LEN as u16).to_be_bytes());
    m.extend_from_slice(&xid.to_be_bytes());
    m.extend_from_slice(&flow.to_be_bytes());
    m.extend_from_slice(&(edge as u32).to_be_bytes());
    m
}

pub fn decode_flow_mod(m: &[u8]) -> Option<(u32, usize)> {
    if m.len() != FLOW_MOD_LEN || m[1] != OFPT_FLOW_MOD {
        return None;
    }
    let flow = u32::from_be_bytes(m[8..12].try_into().ok()?);
    let edge = u32::from_be_bytes(m[12..16].try_into().ok()?);
    Some((flow, edge as usize))
}
