//! Time-ordered event queue with a fixed tiebreak.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::NodeId;

/// Microseconds since the start of the run.
pub type SimTime = u64;

/// Event kinds in tiebreak order: at equal timestamps a lower ordinal is
/// processed first. LTE-U edges come first so that an ON period starting at
/// `t` is already visible to any Wi-Fi decision taken at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    LteOnStart,
    LteOnEnd,
    BeaconDue,
    PacketArrival,
    DifsComplete,
    BackoffSlotTick,
    TxComplete,
    AckDue,
    SenseWindowClose,
    CsatDecision,
}

/// Payload carried by an event. Access events carry the node's access
/// generation so that events invalidated by a freeze can be skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Payload {
    None,
    Generation(u64),
    Transmission(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimEvent {
    pub at: SimTime,
    pub kind: EventKind,
    pub subject: NodeId,
    pub payload: Payload,
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    at: SimTime,
    kind: EventKind,
    subject: NodeId,
    seq: u64,
}

/// Min-queue over `(time, kind, node, insertion sequence)`.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<(Key, Payload)>>,
    seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, ev: SimEvent) {
        let key = Key {
            at: ev.at,
            kind: ev.kind,
            subject: ev.subject,
            seq: self.seq,
        };
        self.seq += 1;
        // The sequence number makes keys unique, so payloads never decide order.
        self.heap.push(Reverse((key, ev.payload)));
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop().map(|Reverse((key, payload))| SimEvent {
            at: key.at,
            kind: key.kind,
            subject: key.subject,
            payload,
        })
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|Reverse((key, _))| key.at)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
