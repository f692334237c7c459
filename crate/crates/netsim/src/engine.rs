use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use time4_wire::consts::OFPBF_ATOMIC;
use time4_wire::{
    apply_features_request, BundleAddMsg, BundleControlMsg, BundleCtrlType, BundleFeaturesRequest, BundleSession,
    FeaturesTimeProperty, OfpError, OfpTime, SwitchFeatures,
};

use crate::clock::{from_switch_clock, to_switch_clock};
use crate::plan::{decode_flow_mod, encode_flow_mod, Changes, Command, Plan};
use crate::{ratio_f64, stream_seed, LoadTimeline, Nanos, Rate, SimError, SimParams, World, NANOS_PER_SEC};

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub lost_packets: f64,
    pub per_flow_loss: BTreeMap<u32, f64>,
    /// From the first switch update to the last one.
    pub update_duration: Nanos,
    pub first_update: Option<Nanos>,
    pub last_update: Option<Nanos>,
    pub offered_packets: f64,
    pub delivered_packets: f64,
    /// Bandwidth held back at the sources, in Mbps·s.
    pub withheld_bandwidth_seconds: f64,
    pub rejections: Vec<(usize, OfpError)>,
    pub aborted: bool,
    pub executed_bundles: usize,
    /// Egress edge of every flow at the end of the run.
    pub final_routes: BTreeMap<u32, usize>,
    /// (time, flow, new edge) for every table change that moved a flow.
    pub route_changes: Vec<(Nanos, u32, usize)>,
    pub timeline: LoadTimeline,
}

#[derive(Debug)]
enum Kind {
    Deliver(usize),
    Install { switch: usize, changes: Changes },
    Poll(usize),
    Join { edge: usize, flow: u32 },
    Leave { edge: usize, flow: u32 },
}

struct Sim<'a> {
    world: &'a World,
    plan: &'a Plan,
    params: &'a SimParams,
    now: Nanos,
    heap: BinaryHeap<Reverse<(Nanos, usize)>>,
    events: Vec<Option<Kind>>,
    rngs: Vec<ChaCha8Rng>,
    sessions: Vec<BundleSession>,
    tables: Vec<BTreeMap<u32, usize>>,
    rates: BTreeMap<u32, Rate>,
    nominal: BTreeMap<u32, Rate>,
    on_edge: Vec<BTreeSet<u32>>,
    lost_bits: BTreeMap<u32, f64>,
    offered_bits: f64,
    delivered_bits: f64,
    withheld_bits: f64,
    timeline: LoadTimeline,
    first_update: Option<Nanos>,
    last_update: Option<Nanos>,
    aborted: bool,
    rejections: Vec<(usize, OfpError)>,
    executed_bundles: usize,
    bundle_cmd: HashMap<(usize, u32), usize>,
    route_changes: Vec<(Nanos, u32, usize)>,
}

/// Runs `plan` on `world`. Events are ordered by (time, sequence number); commands keep their
/// plan order on ties. Loss is integrated up to the last event.
pub fn run(world: &World, plan: &Plan, params: &SimParams) -> Result<LossReport, SimError> {
    params.validate()?;
    world.validate()?;
    plan.validate(world.switches)?;
    let mut sim = Sim::new(world, plan, params)?;
    for (i, c) in plan.commands.iter().enumerate() {
        sim.schedule(c.at(), Kind::Deliver(i));
    }
    while let Some(Reverse((t, seq))) = sim.heap.pop() {
        if t > sim.now {
            sim.advance_to(t);
        }
        let kind = sim.events[seq].take().expect("event handled once");
        sim.handle(kind)?;
    }
    Ok(sim.finish())
}

impl<'a> Sim<'a> {
    fn new(world: &'a World, plan: &'a Plan, params: &'a SimParams) -> Result<Self, SimError> {
        let mut tables = vec![BTreeMap::new(); world.switches];
        let mut on_edge = vec![BTreeSet::new(); world.edges];
        let mut rates = BTreeMap::new();
        for f in &world.flows {
            tables[f.switch].insert(f.id, f.edge);
            on_edge[f.edge].insert(f.id);
            rates.insert(f.id, f.rate);
        }
        let mut sessions: Vec<BundleSession> = (0..world.switches).map(|_| BundleSession::default()).collect();
        if let Some(tol) = plan.tolerance {
            for (s, session) in sessions.iter_mut().enumerate() {
                let now = to_switch_clock(0, world.clocks.offset(s).unwrap_or(0))
                    .ok_or_else(|| SimError::Params("clock offset out of range".into()))?;
                let req = BundleFeaturesRequest {
                    feature_request_flags: time4_wire::consts::OFPBF_TIME_SET_SCHED,
                    time_property: Some(FeaturesTimeProperty {
                        sched_max_future: OfpTime::from_duration(tol.sched_max_future),
                        sched_max_past: OfpTime::from_duration(tol.sched_max_past),
                        ..Default::default()
                    }),
                };
                let mut features = SwitchFeatures::default();
                apply_features_request(&req, &mut features, now)
                    .map_err(|e| SimError::Plan(format!("switch {s} refused tolerance: {e}")))?;
                session.config.tolerance = features.tolerance;
            }
        }
        let mut sim = Sim {
            world,
            plan,
            params,
            now: 0,
            heap: BinaryHeap::new(),
            events: Vec::new(),
            rngs: (0..world.switches).map(|s| ChaCha8Rng::seed_from_u64(stream_seed(params.seed, s as u64))).collect(),
            sessions,
            tables,
            nominal: rates.clone(),
            rates,
            on_edge,
            lost_bits: world.flows.iter().map(|f| (f.id, 0.0)).collect(),
            offered_bits: 0.0,
            delivered_bits: 0.0,
            withheld_bits: 0.0,
            timeline: LoadTimeline::default(),
            first_update: None,
            last_update: None,
            aborted: false,
            rejections: Vec::new(),
            executed_bundles: 0,
            bundle_cmd: HashMap::new(),
            route_changes: Vec::new(),
        };
        sim.record();
        Ok(sim)
    }

    fn schedule(&mut self, at: Nanos, kind: Kind) {
        let seq = self.events.len();
        self.events.push(Some(kind));
        self.heap.push(Reverse((at, seq)));
    }

    fn draw(&mut self, switch: usize, range: Nanos) -> Nanos {
        if range == 0 {
            0
        } else {
            self.rngs[switch].gen_range(0..=range)
        }
    }

    fn load(&self, edge: usize) -> Rate {
        self.on_edge[edge].iter().fold(Rate::zero(), |acc, f| acc + self.rates[f])
    }

    fn record(&mut self) {
        for e in 0..self.world.edges {
            let load = self.load(e);
            self.timeline.push(e, self.now, load);
        }
    }

    /// Closes the segment [now, t) with the current state.
    fn advance_to(&mut self, t: Nanos) {
        self.record();
        let secs = (t - self.now) as f64 / NANOS_PER_SEC as f64;
        let cap = self.world.capacity;
        for e in 0..self.world.edges {
            let load = self.load(e);
            if load.is_zero() {
                continue;
            }
            self.offered_bits += ratio_f64(&load) * secs;
            if load > cap {
                self.delivered_bits += ratio_f64(&cap) * secs;
                let over = ratio_f64(&(load - cap));
                let total = ratio_f64(&load);
                for f in &self.on_edge[e] {
                    *self.lost_bits.get_mut(f).expect("known flow") += ratio_f64(&self.rates[f]) / total * over * secs;
                }
            } else {
                self.delivered_bits += ratio_f64(&load) * secs;
            }
        }
        for (f, nominal) in &self.nominal {
            let cut = *nominal - self.rates[f];
            if cut > Rate::zero() {
                self.withheld_bits += ratio_f64(&cut) * secs;
            }
        }
        self.now = t;
    }

    fn handle(&mut self, kind: Kind) -> Result<(), SimError> {
        match kind {
            Kind::Deliver(i) => self.deliver(i),
            Kind::Install { switch, changes } => self.install(switch, &changes),
            Kind::Poll(switch) => self.poll(switch),
            Kind::Join { edge, flow } => {
                self.on_edge[edge].insert(flow);
                Ok(())
            }
            Kind::Leave { edge, flow } => {
                self.on_edge[edge].remove(&flow);
                Ok(())
            }
        }
    }

    fn local_now(&self, switch: usize) -> OfpTime {
        to_switch_clock(self.now, self.world.clocks.offset(switch).unwrap_or(0)).expect("clock in range")
    }

    fn deliver(&mut self, i: usize) -> Result<(), SimError> {
        match &self.plan.commands[i] {
            Command::FlowMod { switch, changes, latency, .. } => {
                let delay = match latency {
                    Some(l) => *l,
                    None => self.draw(*switch, self.params.install_range),
                };
                self.schedule(self.now + delay, Kind::Install { switch: *switch, changes: changes.clone() });
            }
            Command::SetRate { flow, rate, .. } => {
                if *rate < Rate::zero() {
                    return Err(SimError::Plan(format!("negative rate for flow {flow}")));
                }
                *self.rates.get_mut(flow).ok_or(SimError::UnknownFlow(*flow))? = *rate;
            }
            Command::Bundle { switch, bundle_id, changes, scheduled, .. } => {
                if self.aborted {
                    log::debug!("skipping bundle {bundle_id} to switch {switch}: plan aborted");
                    return Ok(());
                }
                let (switch, id) = (*switch, *bundle_id);
                let now = self.local_now(switch);
                match self.send_bundle(switch, id, changes, *scheduled, now) {
                    Ok(()) => {
                        self.bundle_cmd.insert((switch, id), i);
                        self.schedule(self.now, Kind::Poll(switch));
                        if let Some(deadline) = self.sessions[switch].next_deadline() {
                            let at = from_switch_clock(deadline, self.world.clocks.offset(switch).unwrap_or(0));
                            self.schedule(at.max(self.now), Kind::Poll(switch));
                        }
                    }
                    Err(e) => {
                        log::debug!("switch {switch} rejected bundle {id}: {e}");
                        if self.sessions[switch].state(id).is_some() {
                            let _ = self.sessions[switch]
                                .handle_control(&BundleControlMsg::new(0, id, BundleCtrlType::DiscardRequest, OFPBF_ATOMIC), now);
                        }
                        self.rejections.push((switch, e));
                        if self.plan.all_or_none {
                            self.discard_all();
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn send_bundle(
        &mut self,
        switch: usize,
        id: u32,
        changes: &Changes,
        scheduled: Option<OfpTime>,
        now: OfpTime,
    ) -> Result<(), OfpError> {
        let session = &mut self.sessions[switch];
        session.handle_control(&BundleControlMsg::new(0, id, BundleCtrlType::OpenRequest, OFPBF_ATOMIC), now)?;
        for (k, &(flow, edge)) in changes.iter().enumerate() {
            let message = encode_flow_mod(k as u32, flow, edge);
            session.handle_add(&BundleAddMsg { xid: 0, bundle_id: id, flags: OFPBF_ATOMIC, message })?;
        }
        let commit = match scheduled {
            Some(at) => BundleControlMsg::scheduled_commit(0, id, OFPBF_ATOMIC, at),
            None => BundleControlMsg::new(0, id, BundleCtrlType::CommitRequest, OFPBF_ATOMIC),
        };
        session.handle_control(&commit, now)?;
        Ok(())
    }

    fn discard_all(&mut self) {
        self.aborted = true;
        let mut pending: Vec<(usize, u32)> = self.bundle_cmd.keys().copied().collect();
        pending.sort_unstable();
        for (s, id) in pending {
            if self.sessions[s].state(id).is_some() {
                let now = self.local_now(s);
                let msg = BundleControlMsg::new(0, id, BundleCtrlType::DiscardRequest, OFPBF_ATOMIC);
                self.sessions[s].handle_control(&msg, now).expect("live bundle discards");
                self.bundle_cmd.remove(&(s, id));
            }
        }
    }

    fn poll(&mut self, switch: usize) -> Result<(), SimError> {
        let now = self.local_now(switch);
        let offset = self.world.clocks.offset(switch).unwrap_or(0);
        for done in self.sessions[switch].poll(now) {
            let i = self.bundle_cmd.remove(&(switch, done.bundle_id)).expect("bundle came from the plan");
            let Command::Bundle { scheduled, error, .. } = &self.plan.commands[i] else {
                unreachable!("bundle ids map to bundle commands");
            };
            let delay = match (scheduled, error) {
                (_, Some(e)) => *e,
                (Some(_), None) => self.draw(switch, self.params.sched_error),
                (None, None) => self.draw(switch, self.params.install_range),
            };
            let changes = done
                .messages
                .iter()
                .map(|m| decode_flow_mod(m).ok_or_else(|| SimError::Plan("bundle carries an unknown message".into())))
                .collect::<Result<Changes, _>>()?;
            self.executed_bundles += 1;
            let base = from_switch_clock(done.at, offset).max(self.now);
            self.schedule(base + delay, Kind::Install { switch, changes });
        }
        Ok(())
    }

    fn install(&mut self, switch: usize, changes: &Changes) -> Result<(), SimError> {
        self.first_update.get_or_insert(self.now);
        self.last_update = Some(self.now);
        for &(flow, edge) in changes {
            if edge >= self.world.edges {
                return Err(SimError::Plan(format!("flow {flow} sent to unknown edge {edge}")));
            }
            let slot = self.tables[switch].get_mut(&flow).ok_or(SimError::UnknownFlow(flow))?;
            let old = std::mem::replace(slot, edge);
            if old == edge {
                continue;
            }
            self.route_changes.push((self.now, flow, edge));
            let (d_old, d_new) = (self.world.link_delay[old], self.world.link_delay[edge]);
            if d_old == 0 {
                self.on_edge[old].remove(&flow);
            } else {
                self.schedule(self.now + d_old, Kind::Leave { edge: old, flow });
            }
            if d_new == 0 {
                self.on_edge[edge].insert(flow);
            } else {
                self.schedule(self.now + d_new, Kind::Join { edge, flow });
            }
        }
        Ok(())
    }

    fn finish(mut self) -> LossReport {
        self.record();
        self.timeline.end = self.now;
        let size = self.params.packet_size as f64;
        let per_flow_loss: BTreeMap<u32, f64> = self.lost_bits.iter().map(|(&f, &b)| (f, b / size)).collect();
        let final_routes = self.world.flows.iter().map(|f| (f.id, self.tables[f.switch][&f.id])).collect();
        LossReport {
            lost_packets: per_flow_loss.values().sum(),
            per_flow_loss,
            update_duration: match (self.first_update, self.last_update) {
                (Some(a), Some(b)) => b - a,
                _ => 0,
            },
            first_update: self.first_update,
            last_update: self.last_update,
            offered_packets: self.offered_bits / size,
            delivered_packets: self.delivered_bits / size,
            withheld_bandwidth_seconds: self.withheld_bits / 1e6,
            rejections: self.rejections,
            aborted: self.aborted,
            executed_bundles: self.executed_bundles,
            final_routes,
            route_changes: self.route_changes,
            timeline: self.timeline,
        }
    }
}
