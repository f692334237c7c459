//! Switch-side bundle bookkeeping for one control connection.

use std::collections::BTreeMap;

use crate::consts::OFPBF_TIME;
use crate::error_codes::{BundleFailedCode, OfpError};
use crate::messages::{BundleAddMsg, BundleControlMsg, BundleCtrlType};
use crate::time::OfpTime;
use crate::tolerance::{check_tolerance, ToleranceConfig, ToleranceVerdict};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionConfig {
    pub tolerance: ToleranceConfig,
    pub supports_scheduling: bool,
    /// Refuse a scheduled commit whose `T_s` equals one already pending.
    pub refuse_same_time: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { tolerance: ToleranceConfig::default(), supports_scheduling: true, refuse_same_time: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleState {
    Open,
    Closed,
    Scheduled(OfpTime),
}

#[derive(Debug, Clone)]
struct Bundle {
    serial: u64,
    flags: u16,
    state: BundleState,
    messages: Vec<Vec<u8>>,
}

/// A committed bundle handed to the flow table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Executed {
    pub bundle_id: u32,
    /// Unique per opened bundle, so reuse of an id stays distinguishable.
    pub serial: u64,
    pub flags: u16,
    pub at: OfpTime,
    pub messages: Vec<Vec<u8>>,
}

#[derive(Debug, Default)]
pub struct BundleSession {
    pub config: SessionConfig,
    bundles: BTreeMap<u32, Bundle>,
    ready: Vec<Executed>,
    next_serial: u64,
}

fn failed(code: BundleFailedCode) -> OfpError {
    OfpError::BundleFailed(code)
}

impl BundleSession {
    pub fn new(config: SessionConfig) -> Self {
        BundleSession { config, ..Default::default() }
    }

    pub fn state(&self, bundle_id: u32) -> Option<BundleState> {
        self.bundles.get(&bundle_id).map(|b| b.state)
    }

    pub fn staged(&self, bundle_id: u32) -> Option<&[Vec<u8>]> {
        self.bundles.get(&bundle_id).map(|b| b.messages.as_slice())
    }

    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty() && self.ready.is_empty()
    }

    /// Earliest pending scheduled time, if any.
    pub fn next_deadline(&self) -> Option<OfpTime> {
        self.bundles
            .values()
            .filter_map(|b| match b.state {
                BundleState::Scheduled(at) => Some(at),
                _ => None,
            })
            .min()
    }

    /// Processes one control request and returns its reply. Any failure leaves the
    /// bundle discarded, except for errors about the id itself.
    pub fn handle_control(&mut self, msg: &BundleControlMsg, now: OfpTime) -> Result<BundleControlMsg, OfpError> {
        let reply = msg.reply().ok_or(failed(BundleFailedCode::BadType))?;
        let id = msg.bundle_id;
        let flags = msg.flags & !OFPBF_TIME;
        match msg.ctrl_type {
            BundleCtrlType::OpenRequest => {
                if self.bundles.contains_key(&id) {
                    return Err(failed(BundleFailedCode::BundleExist));
                }
                self.next_serial += 1;
                let bundle = Bundle { serial: self.next_serial, flags, state: BundleState::Open, messages: Vec::new() };
                self.bundles.insert(id, bundle);
            }
            BundleCtrlType::CloseRequest => {
                let bundle = self.bundles.get_mut(&id).ok_or(failed(BundleFailedCode::BadId))?;
                match bundle.state {
                    BundleState::Open => {}
                    BundleState::Closed => return Err(failed(BundleFailedCode::BundleClosed)),
                    BundleState::Scheduled(_) => return Err(failed(BundleFailedCode::BundleInProgress)),
                }
                if bundle.flags != flags {
                    self.bundles.remove(&id);
                    return Err(failed(BundleFailedCode::BadFlags));
                }
                bundle.state = BundleState::Closed;
            }
            BundleCtrlType::CommitRequest => self.commit(msg, flags, now)?,
            BundleCtrlType::DiscardRequest => {
                let bundle = self.bundles.remove(&id).ok_or(failed(BundleFailedCode::BadId))?;
                log::debug!("bundle {id} discarded in state {:?}", bundle.state);
            }
            _ => return Err(failed(BundleFailedCode::BadType)),
        }
        Ok(reply)
    }

    fn commit(&mut self, msg: &BundleControlMsg, flags: u16, now: OfpTime) -> Result<(), OfpError> {
        let id = msg.bundle_id;
        let bundle = self.bundles.get(&id).ok_or(failed(BundleFailedCode::BadId))?;
        if let BundleState::Scheduled(_) = bundle.state {
            return Err(failed(BundleFailedCode::BundleInProgress));
        }
        let abort = |s: &mut Self, e: OfpError| {
            s.bundles.remove(&id);
            Err(e)
        };
        if bundle.flags != flags {
            return abort(self, failed(BundleFailedCode::BadFlags));
        }
        let Some(at) = msg.scheduled_time() else {
            self.execute(id, now);
            return Ok(());
        };
        if !self.config.supports_scheduling {
            return abort(self, OfpError::SCHED_NOT_SUPPORTED);
        }
        match check_tolerance(now, at, &self.config.tolerance) {
            ToleranceVerdict::Reject(e) => abort(self, e),
            ToleranceVerdict::ExecuteNow => {
                self.execute(id, now);
                Ok(())
            }
            ToleranceVerdict::ExecuteAt(at) => {
                if self.config.refuse_same_time && self.next_deadlines().any(|t| t == at) {
                    return abort(self, failed(BundleFailedCode::MsgConflict));
                }
                self.bundles.get_mut(&id).expect("checked above").state = BundleState::Scheduled(at);
                Ok(())
            }
        }
    }

    fn next_deadlines(&self) -> impl Iterator<Item = OfpTime> + '_ {
        self.bundles.values().filter_map(|b| match b.state {
            BundleState::Scheduled(at) => Some(at),
            _ => None,
        })
    }

    fn execute(&mut self, id: u32, at: OfpTime) {
        let b = self.bundles.remove(&id).expect("bundle exists");
        self.ready.push(Executed { bundle_id: id, serial: b.serial, flags: b.flags, at, messages: b.messages });
    }

    pub fn handle_add(&mut self, msg: &BundleAddMsg) -> Result<(), OfpError> {
        let bundle = self.bundles.get_mut(&msg.bundle_id).ok_or(failed(BundleFailedCode::BadId))?;
        match bundle.state {
            BundleState::Open => {}
            BundleState::Closed => return Err(failed(BundleFailedCode::BundleClosed)),
            BundleState::Scheduled(_) => return Err(failed(BundleFailedCode::BundleInProgress)),
        }
        if bundle.flags != msg.flags & !OFPBF_TIME {
            self.bundles.remove(&msg.bundle_id);
            return Err(failed(BundleFailedCode::BadFlags));
        }
        bundle.messages.push(msg.message.clone());
        Ok(())
    }

    /// Bundles due by `now`, in execution order.
    pub fn poll(&mut self, now: OfpTime) -> Vec<Executed> {
        let mut due: Vec<(OfpTime, u64, u32)> = self
            .bundles
            .iter()
            .filter_map(|(&id, b)| match b.state {
                BundleState::Scheduled(at) if at <= now => Some((at, b.serial, id)),
                _ => None,
            })
            .collect();
        due.sort();
        let mut out = std::mem::take(&mut self.ready);
        for (at, _, id) in due {
            self.execute(id, at);
            out.append(&mut self.ready);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::OFPBF_ATOMIC;

    fn t(s: u64, ns: u32) -> OfpTime {
        OfpTime::new(s, ns).unwrap()
    }

    fn ctrl(id: u32, ty: BundleCtrlType) -> BundleControlMsg {
        BundleControlMsg::new(0, id, ty, OFPBF_ATOMIC)
    }

    fn add(id: u32, tag: u8) -> BundleAddMsg {
        BundleAddMsg { xid: 0, bundle_id: id, flags: OFPBF_ATOMIC, message: vec![6, 14, 0, 8, 0, 0, 0, tag] }
    }

    #[test]
    fn untimed_commit_executes_immediately() {
        let mut s = BundleSession::default();
        let now = t(10, 0);
        s.handle_control(&ctrl(1, BundleCtrlType::OpenRequest), now).unwrap();
        s.handle_add(&add(1, 1)).unwrap();
        s.handle_add(&add(1, 2)).unwrap();
        s.handle_control(&ctrl(1, BundleCtrlType::CloseRequest), now).unwrap();
        let reply = s.handle_control(&ctrl(1, BundleCtrlType::CommitRequest), now).unwrap();
        assert_eq!(reply.ctrl_type, BundleCtrlType::CommitReply);
        let done = s.poll(now);
        assert_eq!(done.len(), 1);
        assert_eq!(done[0].messages.len(), 2);
        assert_eq!(done[0].at, now);
        assert!(s.is_empty());
    }

    #[test]
    fn discard_cancels_scheduled_commit() {
        let mut s = BundleSession::default();
        s.handle_control(&ctrl(1, BundleCtrlType::OpenRequest), t(100, 0)).unwrap();
        s.handle_add(&add(1, 1)).unwrap();
        let commit = BundleControlMsg::scheduled_commit(0, 1, OFPBF_ATOMIC, t(100, 500_000_000));
        s.handle_control(&commit, t(100, 0)).unwrap();
        assert_eq!(s.state(1), Some(BundleState::Scheduled(t(100, 500_000_000))));
        assert!(s.poll(t(100, 100)).is_empty());
        s.handle_control(&ctrl(1, BundleCtrlType::DiscardRequest), t(100, 200)).unwrap();
        assert!(s.poll(t(200, 0)).is_empty());
    }

    #[test]
    fn discard_after_execution_fails() {
        let mut s = BundleSession::default();
        s.handle_control(&ctrl(1, BundleCtrlType::OpenRequest), t(1, 0)).unwrap();
        s.handle_control(&BundleControlMsg::scheduled_commit(0, 1, OFPBF_ATOMIC, t(1, 5)), t(1, 0)).unwrap();
        assert_eq!(s.poll(t(1, 5)).len(), 1);
        let err = s.handle_control(&ctrl(1, BundleCtrlType::DiscardRequest), t(1, 6)).unwrap_err();
        assert_eq!(err, OfpError::BundleFailed(BundleFailedCode::BadId));
    }

    #[test]
    fn out_of_order_steps() {
        let mut s = BundleSession::default();
        let now = t(1, 0);
        assert!(s.handle_add(&add(9, 0)).is_err());
        assert!(s.handle_control(&ctrl(9, BundleCtrlType::CommitRequest), now).is_err());
        assert!(s.handle_control(&ctrl(9, BundleCtrlType::OpenReply), now).is_err());
        s.handle_control(&ctrl(1, BundleCtrlType::OpenRequest), now).unwrap();
        assert_eq!(
            s.handle_control(&ctrl(1, BundleCtrlType::OpenRequest), now).unwrap_err(),
            OfpError::BundleFailed(BundleFailedCode::BundleExist)
        );
        s.handle_control(&ctrl(1, BundleCtrlType::CloseRequest), now).unwrap();
        assert_eq!(s.handle_add(&add(1, 0)).unwrap_err(), OfpError::BundleFailed(BundleFailedCode::BundleClosed));
        s.handle_control(&BundleControlMsg::scheduled_commit(0, 1, OFPBF_ATOMIC, t(1, 9)), now).unwrap();
        assert_eq!(
            s.handle_control(&BundleControlMsg::scheduled_commit(0, 1, OFPBF_ATOMIC, t(1, 9)), now).unwrap_err(),
            OfpError::BundleFailed(BundleFailedCode::BundleInProgress)
        );
    }

    #[test]
    fn rejected_schedule_aborts_bundle() {
        let mut s = BundleSession::default();
        s.handle_control(&ctrl(1, BundleCtrlType::OpenRequest), t(100, 0)).unwrap();
        s.handle_add(&add(1, 1)).unwrap();
        let err = s.handle_control(&BundleControlMsg::scheduled_commit(0, 1, OFPBF_ATOMIC, t(102, 0)), t(100, 0));
        assert_eq!(err.unwrap_err(), OfpError::SCHED_FUTURE);
        assert!(s.is_empty());
        assert!(s.poll(t(500, 0)).is_empty());
    }

    #[test]
    fn scheduling_unsupported() {
        let mut s = BundleSession::new(SessionConfig { supports_scheduling: false, ..Default::default() });
        s.handle_control(&ctrl(1, BundleCtrlType::OpenRequest), t(1, 0)).unwrap();
        let err = s.handle_control(&BundleControlMsg::scheduled_commit(0, 1, OFPBF_ATOMIC, t(1, 1)), t(1, 0));
        assert_eq!(err.unwrap_err(), OfpError::SCHED_NOT_SUPPORTED);
    }

    #[test]
    fn same_time_conflict_policy() {
        for refuse in [false, true] {
            let mut s = BundleSession::new(SessionConfig { refuse_same_time: refuse, ..Default::default() });
            let at = t(5, 250);
            for id in [1, 2] {
                s.handle_control(&ctrl(id, BundleCtrlType::OpenRequest), t(5, 0)).unwrap();
            }
            s.handle_control(&BundleControlMsg::scheduled_commit(0, 1, OFPBF_ATOMIC, at), t(5, 0)).unwrap();
            let second = s.handle_control(&BundleControlMsg::scheduled_commit(0, 2, OFPBF_ATOMIC, at), t(5, 0));
            if refuse {
                assert_eq!(second.unwrap_err(), OfpError::BundleFailed(BundleFailedCode::MsgConflict));
                assert_eq!(s.poll(at).len(), 1);
            } else {
                second.unwrap();
                assert_eq!(s.poll(at).len(), 2);
            }
        }
    }

    #[test]
    fn past_commit_within_tolerance_runs_now() {
        let mut s = BundleSession::default();
        s.handle_control(&ctrl(3, BundleCtrlType::OpenRequest), t(100, 0)).unwrap();
        s.handle_control(&BundleControlMsg::scheduled_commit(0, 3, OFPBF_ATOMIC, t(99, 500_000_000)), t(100, 0)).unwrap();
        let done = s.poll(t(100, 0));
        assert_eq!(done[0].at, t(100, 0));
    }
}
