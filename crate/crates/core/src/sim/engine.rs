//! The event loop: LTE-U square wave, CSAT sensing, CSMA/CA nodes and the
//! association exchange.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::assoc::{AssocClientState, ClientAction};
use super::channel::{ChannelState, Interval, Outcome, PowerMap, Transmission};
use super::event::{EventKind, EventQueue, Payload, SimEvent, SimTime};
use super::mac::{Frame, InFlight, MacPhase, WifiTxState};
use super::scenario::{AccessMode, LteMode, Scenario};
use super::trace::{Detail, TraceEvent, TraceLog, TraceRecord};
use super::{NodeId, AP_A, AP_B, LTE_BS};
use crate::csat::{measure_window, CsatConfig, CsatState, WindowOccupant};
use crate::error::ConfigError;
use crate::params::{DutyCycle, PacketKind};

const SETUP_STREAM: u64 = 0;
const MAC_STREAM: u64 = 1;
const PROBE_STREAM: u64 = 2;

/// Run one scenario to its horizon. Events at or after `duration_us` are
/// not processed.
pub fn run(s: &Scenario) -> Result<TraceLog, ConfigError> {
    s.validate()?;
    let mut engine = Engine::new(s);
    engine.init();
    engine.event_loop();
    Ok(engine.trace)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cause {
    Lte,
    Wifi,
}

struct PendingSwitch {
    duty: DutyCycle,
    decided_at: SimTime,
    not_before: SimTime,
}

struct Engine<'a> {
    s: &'a Scenario,
    now: SimTime,
    powers: PowerMap,
    queue: EventQueue,
    trace: TraceLog,
    channel: ChannelState,
    macs: Vec<WifiTxState>,
    wifi_nodes: Vec<NodeId>,
    clients: Vec<Option<AssocClientState>>,
    lte_duty: Option<DutyCycle>,
    lte_on: Option<Interval>,
    off_since: Option<SimTime>,
    csat: Option<(CsatConfig, CsatState)>,
    sense_log: Vec<WindowOccupant>,
    pending_switch: Option<PendingSwitch>,
    next_tx_id: u64,
    mac_rng: ChaCha8Rng,
    probe_rng: ChaCha8Rng,
    probe_gap: Option<Exp<f64>>,
}

impl<'a> Engine<'a> {
    fn new(s: &'a Scenario) -> Self {
        let n = s.node_count() as usize;
        let mut wifi_nodes = Vec::new();
        if s.wifi_ap_enabled {
            wifi_nodes.push(AP_B);
        }
        if s.second_ap_enabled {
            wifi_nodes.push(AP_A);
        }
        wifi_nodes.extend(s.client_ids());
        let probe_gap = (s.n_clients > 0 && s.probe_rate_per_s > 0.0)
            .then(|| Exp::new(s.probe_rate_per_s / 1e6).expect("validated rate"));
        Self {
            s,
            now: 0,
            powers: s.links.resolve(),
            queue: EventQueue::new(),
            trace: TraceLog::default(),
            channel: ChannelState::default(),
            macs: vec![WifiTxState::default(); n],
            wifi_nodes,
            clients: vec![None; n],
            lte_duty: s.lte_mode.initial_duty(),
            lte_on: None,
            off_since: None,
            csat: match s.lte_mode {
                LteMode::Csat(c) => Some((c, CsatState::new(&c))),
                _ => None,
            },
            sense_log: Vec::new(),
            pending_switch: None,
            next_tx_id: 0,
            mac_rng: stream(s.seed, MAC_STREAM),
            probe_rng: stream(s.seed, PROBE_STREAM),
            probe_gap,
        }
    }

    fn push(&mut self, at: SimTime, kind: EventKind, subject: NodeId, payload: Payload) {
        self.queue.push(SimEvent {
            at,
            kind,
            subject,
            payload,
        });
    }

    fn log(&mut self, event: TraceEvent, node: NodeId, kind: Option<PacketKind>, detail: Detail) {
        self.trace.records.push(TraceRecord {
            t_us: self.now,
            event,
            node,
            packet_kind: kind,
            detail,
            duty: self.lte_duty,
        });
    }

    fn init(&mut self) {
        let s = self.s;
        let mut setup = stream(s.seed, SETUP_STREAM);

        if let Some(dc) = self.lte_duty {
            let phase = s
                .lte_phase_us
                .unwrap_or_else(|| setup.random_range(0..dc.cycle_us()));
            if let Some((cfg, state)) = self.csat.as_mut() {
                let offset = s
                    .csat_round_offset
                    .unwrap_or_else(|| setup.random_range(0..cfg.n_windows))
                    % cfg.n_windows;
                for _ in 0..offset {
                    state
                        .observe(cfg, s.noise_floor_dbm)
                        .expect("offset below round length");
                }
            }
            if phase == 0 {
                self.push(0, EventKind::LteOnStart, LTE_BS, Payload::None);
            } else if phase < dc.t_on_us {
                let on = Interval::new(0, dc.t_on_us - phase);
                self.lte_on = Some(on);
                self.log(TraceEvent::LteOn, LTE_BS, None, Detail::None);
                self.push(on.end, EventKind::LteOnEnd, LTE_BS, Payload::None);
            } else {
                // Already inside an OFF window whose start was not observed.
                self.log(TraceEvent::LteOff, LTE_BS, None, Detail::None);
                self.push(dc.cycle_us() - phase, EventKind::LteOnStart, LTE_BS, Payload::None);
            }
        }

        if s.wifi_ap_enabled {
            self.push(s.wifi_ap_start_us, EventKind::BeaconDue, AP_B, Payload::None);
        }
        if s.second_ap_enabled {
            let beacon_phase = setup.random_range(0..s.phy.beacon_interval_us);
            self.push(beacon_phase, EventKind::BeaconDue, AP_A, Payload::None);
            self.push(0, EventKind::PacketArrival, AP_A, Payload::None);
        }
        for c in s.client_ids().take(s.associating_clients as usize) {
            self.clients[c as usize] = Some(AssocClientState::new(0));
            self.log(
                TraceEvent::AssocState,
                c,
                None,
                Detail::Assoc(super::assoc::AssocPhase::ScanningPassive),
            );
        }
        self.schedule_probe();
    }

    fn schedule_probe(&mut self) {
        if let Some(exp) = self.probe_gap {
            let gap = (exp.sample(&mut self.probe_rng).ceil() as u64).max(1);
            let client = super::FIRST_CLIENT + self.probe_rng.random_range(0..self.s.n_clients);
            self.push(self.now + gap, EventKind::PacketArrival, client, Payload::None);
        }
    }

    fn event_loop(&mut self) {
        while let Some(ev) = self.queue.pop() {
            if ev.at >= self.s.duration_us {
                break;
            }
            debug_assert!(ev.at >= self.now);
            self.now = ev.at;
            let n = ev.subject;
            match ev.kind {
                EventKind::LteOnStart => self.on_lte_on_start(),
                EventKind::LteOnEnd => self.on_lte_on_end(),
                EventKind::BeaconDue => self.on_beacon_due(n),
                EventKind::PacketArrival => self.on_packet_arrival(n),
                EventKind::DifsComplete => {
                    if self.access_event_valid(n, MacPhase::Difs, ev.payload) {
                        self.on_difs_complete(n);
                    }
                }
                EventKind::BackoffSlotTick => {
                    if self.access_event_valid(n, MacPhase::Backoff, ev.payload) {
                        self.macs[n as usize].backoff_slots_remaining = Some(0);
                        self.transmit(n);
                    }
                }
                EventKind::TxComplete => self.on_tx_complete(n),
                EventKind::AckDue => self.finish(n),
                EventKind::SenseWindowClose => self.on_sense_window_close(),
                EventKind::CsatDecision => self.on_csat_decision(),
            }
        }
    }

    fn access_event_valid(&self, n: NodeId, phase: MacPhase, payload: Payload) -> bool {
        let mac = &self.macs[n as usize];
        mac.phase == phase && payload == Payload::Generation(mac.generation)
    }

    // LTE-U and CSAT

    fn on_lte_on_start(&mut self) {
        if self.csat.is_some() && self.off_since.is_some() {
            self.push(self.now, EventKind::SenseWindowClose, LTE_BS, Payload::None);
        }
        if let Some(p) = &self.pending_switch {
            if self.now > p.decided_at && self.now >= p.not_before {
                let from = self.lte_duty.expect("CSAT always has a duty cycle");
                self.lte_duty = Some(p.duty);
                self.pending_switch = None;
                self.log(TraceEvent::CsatSwitch, LTE_BS, None, Detail::SwitchedFrom(from));
            }
        }
        let dc = self.lte_duty.expect("LTE-U events only run with a duty cycle");
        let on = Interval::new(self.now, self.now + dc.t_on_us);
        self.lte_on = Some(on);
        self.channel.lte_on(on);
        self.log(TraceEvent::LteOn, LTE_BS, None, Detail::None);
        self.push(on.end, EventKind::LteOnEnd, LTE_BS, Payload::None);
        self.reevaluate(Cause::Lte);
    }

    fn on_lte_on_end(&mut self) {
        let dc = self.lte_duty.expect("LTE-U events only run with a duty cycle");
        self.lte_on = None;
        if self.csat.is_some() {
            self.off_since = Some(self.now);
        }
        self.log(TraceEvent::LteOff, LTE_BS, None, Detail::None);
        self.push(self.now + dc.t_off_us, EventKind::LteOnStart, LTE_BS, Payload::None);
        self.reevaluate(Cause::Lte);
    }

    fn on_sense_window_close(&mut self) {
        let Some(from) = self.off_since.take() else {
            return;
        };
        let now = self.now;
        let dbm = measure_window(from, now, &self.sense_log, self.s.noise_floor_dbm);
        self.sense_log.retain(|o| o.end_us > now);
        self.log(TraceEvent::SenseWindow, LTE_BS, None, Detail::power(dbm));
        let (cfg, state) = self.csat.as_mut().expect("sensing only in CSAT mode");
        state.observe(cfg, dbm).expect("decision closes every round");
        if state.round_complete(cfg) {
            self.push(now, EventKind::CsatDecision, LTE_BS, Payload::None);
        }
    }

    fn on_csat_decision(&mut self) {
        let (cfg, state) = self.csat.as_mut().expect("decisions only in CSAT mode");
        let hw_delay = cfg.hw_delay_us;
        let d = state.decide(cfg).expect("decision scheduled at round end");
        self.log(
            TraceEvent::CsatDecision,
            LTE_BS,
            None,
            Detail::WifiDetected(d.wifi_detected),
        );
        self.pending_switch = (Some(d.duty) != self.lte_duty).then_some(PendingSwitch {
            duty: d.duty,
            decided_at: self.now,
            not_before: self.now + hw_delay,
        });
    }

    // Traffic sources

    fn on_beacon_due(&mut self, n: NodeId) {
        self.log(TraceEvent::BeaconDue, n, Some(PacketKind::Beacon), Detail::None);
        if let Some(i) = self.macs[n as usize].pending_beacon() {
            self.macs[n as usize].pending.remove(i);
            self.log(
                TraceEvent::BeaconSuppressed,
                n,
                Some(PacketKind::Beacon),
                Detail::None,
            );
        }
        self.enqueue(n, Frame::new(PacketKind::Beacon, None));
        let next = self.now + self.s.phy.beacon_interval_us;
        self.push(next, EventKind::BeaconDue, n, Payload::None);
    }

    fn on_packet_arrival(&mut self, n: NodeId) {
        if n == AP_A {
            self.log(TraceEvent::PacketArrival, n, Some(PacketKind::Data), Detail::None);
            self.enqueue(n, Frame::new(PacketKind::Data, None));
            return;
        }
        self.log(
            TraceEvent::PacketArrival,
            n,
            Some(PacketKind::ProbeRequest),
            Detail::None,
        );
        self.enqueue(n, Frame::new(PacketKind::ProbeRequest, None));
        self.schedule_probe();
    }

    fn ap_active(&self) -> bool {
        self.s.wifi_ap_enabled && self.now >= self.s.wifi_ap_start_us
    }

    // CSMA/CA

    fn busy(&self, n: NodeId) -> bool {
        let thr = self.s.wifi_cs_threshold_dbm;
        let now = self.now;
        let lte = self.lte_on.is_some_and(|on| on.contains(now)) && self.powers.get(LTE_BS, n) >= thr;
        lte || self.channel.active().iter().any(|t| {
            t.node != n && t.interval.contains(now) && self.powers.get(t.node, n) >= thr
        })
    }

    fn difs_us(&self) -> u64 {
        match self.s.access_mode {
            AccessMode::Dcf => self.s.phy.difs_us,
            AccessMode::SlottedImmediate => 0,
        }
    }

    fn enqueue(&mut self, n: NodeId, frame: Frame) {
        let mac = &mut self.macs[n as usize];
        mac.pending.push_back(frame);
        if mac.phase == MacPhase::Idle {
            self.start_access(n);
        }
    }

    fn start_access(&mut self, n: NodeId) {
        if self.busy(n) {
            let mac = &mut self.macs[n as usize];
            mac.phase = MacPhase::DeferredToOffEnd;
            mac.needs_backoff = true;
        } else {
            self.begin_difs(n);
        }
    }

    fn begin_difs(&mut self, n: NodeId) {
        let at = self.now + self.difs_us();
        let mac = &mut self.macs[n as usize];
        mac.generation += 1;
        mac.phase = MacPhase::Difs;
        mac.access_at = at;
        let generation = mac.generation;
        self.push(at, EventKind::DifsComplete, n, Payload::Generation(generation));
    }

    /// Re-sense the channel for every contending node after the occupancy
    /// changed. A node whose DIFS or backoff ends at this very instant is
    /// not stopped by a Wi-Fi frame starting now: both go out together.
    fn reevaluate(&mut self, cause: Cause) {
        for i in 0..self.wifi_nodes.len() {
            let n = self.wifi_nodes[i];
            let mac = &self.macs[n as usize];
            match mac.phase {
                MacPhase::Difs | MacPhase::Backoff => {
                    let simultaneous = cause == Cause::Wifi && mac.access_at == self.now;
                    if !simultaneous && self.busy(n) {
                        let slot = self.s.phy.slot_us;
                        self.macs[n as usize].freeze(self.now, slot);
                    }
                }
                MacPhase::DeferredToOffEnd if !self.busy(n) => self.begin_difs(n),
                _ => {}
            }
        }
    }

    fn on_difs_complete(&mut self, n: NodeId) {
        let slotted = self.s.access_mode == AccessMode::SlottedImmediate;
        if slotted || !self.macs[n as usize].needs_backoff {
            self.transmit(n);
            return;
        }
        let cw = self.s.phy.cw_min;
        let slots = match self.macs[n as usize].backoff_slots_remaining {
            Some(left) => left,
            None => self.mac_rng.random_range(0..cw),
        };
        self.macs[n as usize].backoff_slots_remaining = Some(slots);
        if slots == 0 {
            self.transmit(n);
            return;
        }
        if self.busy(n) {
            // Another frame started at this same instant.
            self.macs[n as usize].phase = MacPhase::DeferredToOffEnd;
            return;
        }
        let at = self.now + u64::from(slots) * self.s.phy.slot_us;
        let mac = &mut self.macs[n as usize];
        mac.phase = MacPhase::Backoff;
        mac.countdown_from = self.now;
        mac.access_at = at;
        let generation = mac.generation;
        self.push(at, EventKind::BackoffSlotTick, n, Payload::Generation(generation));
    }

    fn occupancy_us(&self, kind: PacketKind) -> (u64, u64) {
        let s = self.s;
        let occ = s.frame_sizes.occupancy_us(kind, &s.phy);
        let frame = if kind.requires_ack() {
            s.phy.frame_airtime(s.frame_sizes.bytes(kind, &s.phy))
        } else {
            occ
        };
        match s.access_mode {
            AccessMode::Dcf => (frame, occ),
            AccessMode::SlottedImmediate => {
                let slot = s.phy.slot_us;
                let rounded = occ.div_ceil(slot) * slot;
                let frame = if frame == occ { rounded } else { frame };
                (frame, rounded)
            }
        }
    }

    fn transmit(&mut self, n: NodeId) {
        let frame = self.macs[n as usize]
            .take_next()
            .expect("access only runs with a queued frame");
        let tx_id = self.next_tx_id;
        self.next_tx_id += 1;
        let (frame_us, occ_us) = self.occupancy_us(frame.kind);
        let interval = Interval::new(self.now, self.now + occ_us);
        let lte_on_seen = self
            .lte_on
            .filter(|on| on.overlaps(&interval))
            .into_iter()
            .collect();
        self.channel.begin(Transmission {
            id: tx_id,
            node: n,
            kind: frame.kind,
            dest: frame.dest,
            interval,
            lte_on_seen,
            wifi_overlaps: Vec::new(),
        });
        if self.csat.is_some() {
            self.sense_log.push(WindowOccupant {
                start_us: interval.start,
                end_us: interval.end,
                power_dbm: self.powers.get(n, LTE_BS),
            });
        }
        let mac = &mut self.macs[n as usize];
        mac.phase = MacPhase::Transmitting;
        mac.current = Some(InFlight {
            frame,
            tx_id,
            end: interval.end,
        });
        mac.needs_backoff = false;
        mac.backoff_slots_remaining = None;
        self.log(TraceEvent::TxStart, n, Some(frame.kind), Detail::None);
        if frame.kind == PacketKind::ProbeRequest {
            let now = self.now;
            self.client_step(n, |c| {
                c.on_probe_sent(now);
                ClientAction::None
            });
        }
        self.push(
            self.now + frame_us,
            EventKind::TxComplete,
            n,
            Payload::Transmission(tx_id),
        );
        self.reevaluate(Cause::Wifi);
    }

    fn on_tx_complete(&mut self, n: NodeId) {
        let cur = self.macs[n as usize].current.expect("frame in flight");
        if cur.frame.kind.requires_ack() {
            self.macs[n as usize].phase = MacPhase::AwaitAck;
            self.log(TraceEvent::AckDue, n, Some(cur.frame.kind), Detail::None);
            self.push(cur.end, EventKind::AckDue, n, Payload::Transmission(cur.tx_id));
        } else {
            self.finish(n);
        }
    }

    fn finish(&mut self, n: NodeId) {
        let cur = self.macs[n as usize].current.take().expect("frame in flight");
        let tx = self.channel.finish(cur.tx_id).expect("transmission registered");
        let outcome = tx.outcome();
        let frame = cur.frame;
        self.log(TraceEvent::TxComplete, n, Some(frame.kind), Detail::Outcome(outcome));
        self.macs[n as usize].phase = MacPhase::Idle;
        self.reevaluate(Cause::Wifi);

        if outcome == Outcome::Delivered {
            self.delivered(n, frame);
        } else if frame.kind.requires_ack() {
            self.failed(n, frame);
        }
        if n == AP_A && !self.macs[n as usize].pending.iter().any(|f| f.kind == PacketKind::Data) {
            self.macs[n as usize].pending.push_back(Frame::new(PacketKind::Data, None));
        }
        let mac = &mut self.macs[n as usize];
        if mac.phase == MacPhase::Idle && !mac.pending.is_empty() {
            mac.needs_backoff = true;
            self.start_access(n);
        }
    }

    fn delivered(&mut self, n: NodeId, frame: Frame) {
        let now = self.now;
        match frame.kind {
            PacketKind::Beacon if n == AP_B => {
                if self.powers.get(AP_B, LTE_BS) >= self.s.ed_threshold_dbm() {
                    self.log(
                        TraceEvent::BeaconDetected,
                        AP_B,
                        Some(PacketKind::Beacon),
                        Detail::None,
                    );
                }
                if self.s.passive_scanning {
                    for c in self.s.client_ids() {
                        self.client_step(c, |st| st.on_beacon(now, true));
                    }
                }
            }
            PacketKind::ProbeRequest => {
                if self.ap_active() {
                    self.enqueue(AP_B, Frame::new(PacketKind::ProbeResponse, Some(n)));
                }
            }
            PacketKind::AuthRequest if self.ap_active() => {
                self.enqueue(AP_B, Frame::new(PacketKind::AuthResponse, Some(n)));
            }
            PacketKind::AssocRequest if self.ap_active() => {
                self.enqueue(AP_B, Frame::new(PacketKind::AssocResponse, Some(n)));
            }
            PacketKind::ProbeResponse | PacketKind::AuthResponse | PacketKind::AssocResponse => {
                if let Some(c) = frame.dest {
                    self.client_step(c, |st| st.on_response(now, frame.kind));
                }
            }
            _ => {}
        }
    }

    fn failed(&mut self, n: NodeId, mut frame: Frame) {
        frame.attempts += 1;
        if frame.attempts < self.s.retry_limit {
            self.macs[n as usize].pending.push_front(frame);
            return;
        }
        self.log(
            TraceEvent::PacketDiscarded,
            n,
            Some(frame.kind),
            Detail::Retries(frame.attempts),
        );
        let client = if n >= super::FIRST_CLIENT { Some(n) } else { frame.dest };
        if let Some(c) = client {
            let now = self.now;
            self.client_step(c, |st| {
                st.on_exchange_failed(now);
                ClientAction::None
            });
        }
    }

    /// Apply `f` to an associating client, log any phase change and queue
    /// the frame it asks for.
    fn client_step(&mut self, c: NodeId, f: impl FnOnce(&mut AssocClientState) -> ClientAction) {
        let Some(state) = self.clients.get_mut(c as usize).and_then(Option::as_mut) else {
            return;
        };
        let before = state.transitions.len();
        let action = f(state);
        let new: Vec<_> = state.transitions[before..].iter().map(|&(_, p)| p).collect();
        for phase in new {
            self.log(TraceEvent::AssocState, c, None, Detail::Assoc(phase));
        }
        if let ClientAction::Send(kind) = action {
            self.enqueue(c, Frame::new(kind, Some(AP_B)));
        }
    }
}
