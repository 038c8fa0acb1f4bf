//! Per-node CSMA/CA state.

use std::collections::VecDeque;

use super::event::SimTime;
use super::NodeId;
use crate::params::PacketKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacPhase {
    Idle,
    Difs,
    Backoff,
    Transmitting,
    /// Frame is off the air; waiting out SIFS + ACK.
    AwaitAck,
    /// Channel busy (LTE-U ON or another Wi-Fi frame); waiting for it to
    /// clear before sensing DIFS again.
    DeferredToOffEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub kind: PacketKind,
    pub dest: Option<NodeId>,
    /// Failed attempts so far.
    pub attempts: u32,
}

impl Frame {
    pub fn new(kind: PacketKind, dest: Option<NodeId>) -> Self {
        Self {
            kind,
            dest,
            attempts: 0,
        }
    }
}

/// A frame that has gone out on the air.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InFlight {
    pub frame: Frame,
    pub tx_id: u64,
    /// End of the channel occupancy, ACK included.
    pub end: SimTime,
}

#[derive(Debug, Clone)]
pub struct WifiTxState {
    pub phase: MacPhase,
    pub pending: VecDeque<Frame>,
    /// Frame on the air or awaiting its ACK.
    pub current: Option<InFlight>,
    /// Bumped whenever a scheduled DIFS or backoff completion is cancelled.
    pub generation: u64,
    /// Time of the pending DIFS or backoff completion event.
    pub access_at: SimTime,
    /// The next access must include a backoff (the node deferred, or has
    /// just transmitted with more frames queued).
    pub needs_backoff: bool,
    pub backoff_slots_remaining: Option<u32>,
    /// Start of the current uninterrupted backoff countdown.
    pub countdown_from: SimTime,
}

impl Default for WifiTxState {
    fn default() -> Self {
        Self {
            phase: MacPhase::Idle,
            pending: VecDeque::new(),
            current: None,
            generation: 0,
            access_at: 0,
            needs_backoff: false,
            backoff_slots_remaining: None,
            countdown_from: 0,
        }
    }
}

impl WifiTxState {
    /// Cancel a running DIFS or backoff because the channel turned busy at
    /// `now`. Completed backoff slots are kept off the counter.
    pub fn freeze(&mut self, now: SimTime, slot_us: u64) {
        if self.phase == MacPhase::Backoff {
            let done = ((now - self.countdown_from) / slot_us) as u32;
            if let Some(left) = self.backoff_slots_remaining.as_mut() {
                *left = left.saturating_sub(done);
            }
        }
        self.generation += 1;
        self.phase = MacPhase::DeferredToOffEnd;
        self.needs_backoff = true;
    }

    /// Take the next frame to send. Beacons jump the queue.
    pub fn take_next(&mut self) -> Option<Frame> {
        let idx = self
            .pending
            .iter()
            .position(|f| f.kind == PacketKind::Beacon)
            .unwrap_or(0);
        self.pending.remove(idx)
    }

    pub fn pending_beacon(&self) -> Option<usize> {
        self.pending.iter().position(|f| f.kind == PacketKind::Beacon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn freeze_keeps_remaining_slots() {
        let mut m = WifiTxState {
            phase: MacPhase::Backoff,
            backoff_slots_remaining: Some(10),
            countdown_from: 1_000,
            ..WifiTxState::default()
        };
        // 3 full slots and part of a fourth.
        m.freeze(1_000 + 3 * 9 + 4, 9);
        assert_eq!(m.backoff_slots_remaining, Some(7));
        assert_eq!(m.phase, MacPhase::DeferredToOffEnd);
        assert!(m.needs_backoff);
        assert_eq!(m.generation, 1);
    }

    #[test]
    fn freeze_during_difs_keeps_counter() {
        let mut m = WifiTxState {
            phase: MacPhase::Difs,
            backoff_slots_remaining: Some(4),
            ..WifiTxState::default()
        };
        m.freeze(50, 9);
        assert_eq!(m.backoff_slots_remaining, Some(4));
    }

    #[test]
    fn beacon_goes_first() {
        let mut m = WifiTxState::default();
        m.pending.push_back(Frame::new(PacketKind::ProbeResponse, Some(3)));
        m.pending.push_back(Frame::new(PacketKind::Beacon, None));
        assert_eq!(m.pending_beacon(), Some(1));
        assert_eq!(m.take_next().unwrap().kind, PacketKind::Beacon);
        assert_eq!(m.take_next().unwrap().kind, PacketKind::ProbeResponse);
        assert_eq!(m.take_next(), None);
    }
}
