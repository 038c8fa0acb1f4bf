//! Client side of scanning, authentication and association.

use std::fmt;

use super::event::SimTime;
use crate::params::PacketKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssocPhase {
    ScanningPassive,
    ScanningActive,
    Authenticating,
    Associating,
    Associated,
}

impl AssocPhase {
    pub const ALL: [AssocPhase; 5] = [
        AssocPhase::ScanningPassive,
        AssocPhase::ScanningActive,
        AssocPhase::Authenticating,
        AssocPhase::Associating,
        AssocPhase::Associated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AssocPhase::ScanningPassive => "scanning_passive",
            AssocPhase::ScanningActive => "scanning_active",
            AssocPhase::Authenticating => "authenticating",
            AssocPhase::Associating => "associating",
            AssocPhase::Associated => "associated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

impl fmt::Display for AssocPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What the client has to send after a state change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClientAction {
    None,
    Send(PacketKind),
}

/// Association progress of one client.
#[derive(Debug, Clone, PartialEq)]
pub struct AssocClientState {
    pub phase: AssocPhase,
    /// `(time, phase entered)` for every transition, starting with the
    /// initial phase.
    pub transitions: Vec<(SimTime, AssocPhase)>,
    pub restarts: u32,
}

impl AssocClientState {
    pub fn new(at: SimTime) -> Self {
        Self {
            phase: AssocPhase::ScanningPassive,
            transitions: vec![(at, AssocPhase::ScanningPassive)],
            restarts: 0,
        }
    }

    fn enter(&mut self, at: SimTime, phase: AssocPhase) {
        self.phase = phase;
        self.transitions.push((at, phase));
    }

    /// The client put a probe request on the air.
    pub fn on_probe_sent(&mut self, at: SimTime) -> bool {
        if self.phase == AssocPhase::ScanningPassive {
            self.enter(at, AssocPhase::ScanningActive);
            return true;
        }
        false
    }

    /// A beacon from the AP reached the client.
    pub fn on_beacon(&mut self, at: SimTime, passive_scanning: bool) -> ClientAction {
        if passive_scanning && self.phase == AssocPhase::ScanningPassive {
            self.enter(at, AssocPhase::Authenticating);
            return ClientAction::Send(PacketKind::AuthRequest);
        }
        ClientAction::None
    }

    /// A frame from the AP addressed to this client was delivered. Responses
    /// that do not match the outstanding request are ignored.
    pub fn on_response(&mut self, at: SimTime, kind: PacketKind) -> ClientAction {
        match (self.phase, kind) {
            (AssocPhase::ScanningActive, PacketKind::ProbeResponse) => {
                self.enter(at, AssocPhase::Authenticating);
                ClientAction::Send(PacketKind::AuthRequest)
            }
            (AssocPhase::Authenticating, PacketKind::AuthResponse) => {
                self.enter(at, AssocPhase::Associating);
                ClientAction::Send(PacketKind::AssocRequest)
            }
            (AssocPhase::Associating, PacketKind::AssocResponse) => {
                self.enter(at, AssocPhase::Associated);
                ClientAction::None
            }
            _ => ClientAction::None,
        }
    }

    /// An exchange ran out of retries: start scanning again.
    pub fn on_exchange_failed(&mut self, at: SimTime) {
        if self.phase != AssocPhase::Associated {
            self.restarts += 1;
            self.enter(at, AssocPhase::ScanningPassive);
        }
    }

    pub fn associated_at(&self) -> Option<SimTime> {
        self.transitions
            .iter()
            .find(|(_, p)| *p == AssocPhase::Associated)
            .map(|(t, _)| *t)
    }
}
