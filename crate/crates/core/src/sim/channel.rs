//! Shared-medium bookkeeping: who is on the air, who hears whom, and what
//! happened to each transmission.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::event::SimTime;
use super::NodeId;
use crate::error::ConfigError;
use crate::params::PacketKind;

/// Half-open interval `[start, end)` in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub start: SimTime,
    pub end: SimTime,
}

impl Interval {
    pub fn new(start: SimTime, end: SimTime) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, t: SimTime) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Delivered,
    DroppedOverlapOn,
    DroppedCollision,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Delivered => "delivered",
            Outcome::DroppedOverlapOn => "dropped_overlap_on",
            Outcome::DroppedCollision => "dropped_collision",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Outcome::Delivered,
            Outcome::DroppedOverlapOn,
            Outcome::DroppedCollision,
        ]
        .into_iter()
        .find(|o| o.as_str() == s)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a transmission occupying `tx` (for acknowledged frames this
/// includes SIFS and the ACK). Overlap with an LTE-U ON interval takes
/// precedence over overlap with another Wi-Fi transmission.
pub fn adjudicate(tx: Interval, lte_on: &[Interval], wifi: &[Interval]) -> Outcome {
    if lte_on.iter().any(|on| on.overlaps(&tx)) {
        Outcome::DroppedOverlapOn
    } else if wifi.iter().any(|w| w.overlaps(&tx)) {
        Outcome::DroppedCollision
    } else {
        Outcome::Delivered
    }
}

/// One Wi-Fi transmission on the air.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub id: u64,
    pub node: NodeId,
    pub kind: PacketKind,
    pub dest: Option<NodeId>,
    pub interval: Interval,
    /// LTE-U ON intervals seen while on the air.
    pub lte_on_seen: Vec<Interval>,
    /// Other Wi-Fi transmissions that overlapped this one.
    pub wifi_overlaps: Vec<Interval>,
}

impl Transmission {
    pub fn outcome(&self) -> Outcome {
        adjudicate(self.interval, &self.lte_on_seen, &self.wifi_overlaps)
    }
}

/// Received power for every (transmitter, listener) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkTable {
    pub default_dbm: f64,
    pub overrides: Vec<LinkPower>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkPower {
    pub tx: NodeId,
    pub rx: NodeId,
    pub dbm: f64,
}

impl Default for LinkTable {
    fn default() -> Self {
        Self {
            default_dbm: -50.0,
            overrides: Vec::new(),
        }
    }
}

impl LinkTable {
    pub fn validate(&self, node_count: u32) -> Result<(), ConfigError> {
        if !self.default_dbm.is_finite() {
            return Err(ConfigError::LinkPower(self.default_dbm));
        }
        for l in &self.overrides {
            if !l.dbm.is_finite() {
                return Err(ConfigError::LinkPower(l.dbm));
            }
            for n in [l.tx, l.rx] {
                if n >= node_count {
                    return Err(ConfigError::UnknownNode(n));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> PowerMap {
        PowerMap {
            default_dbm: self.default_dbm,
            map: self.overrides.iter().map(|l| ((l.tx, l.rx), l.dbm)).collect(),
        }
    }
}

/// Lookup form of [`LinkTable`].
#[derive(Debug, Clone)]
pub struct PowerMap {
    default_dbm: f64,
    map: BTreeMap<(NodeId, NodeId), f64>,
}

impl PowerMap {
    pub fn get(&self, tx: NodeId, rx: NodeId) -> f64 {
        self.map.get(&(tx, rx)).copied().unwrap_or(self.default_dbm)
    }
}

/// Transmissions currently on the air.
#[derive(Debug, Default)]
pub struct ChannelState {
    active: Vec<Transmission>,
}

impl ChannelState {
    pub fn active(&self) -> &[Transmission] {
        &self.active
    }

    /// Register a transmission, recording mutual overlap with everything
    /// already on the air.
    pub fn begin(&mut self, mut tx: Transmission) {
        for other in &mut self.active {
            if other.interval.overlaps(&tx.interval) {
                other.wifi_overlaps.push(tx.interval);
                tx.wifi_overlaps.push(other.interval);
            }
        }
        self.active.push(tx);
    }

    /// Record an LTE-U ON interval against every transmission it touches.
    pub fn lte_on(&mut self, on: Interval) {
        for tx in &mut self.active {
            if tx.interval.overlaps(&on) {
                tx.lte_on_seen.push(on);
            }
        }
    }

    pub fn finish(&mut self, id: u64) -> Option<Transmission> {
        let idx = self.active.iter().position(|t| t.id == id)?;
        Some(self.active.swap_remove(idx))
    }

    /// Whether `listener` hears any transmission other than its own at or
    /// above `threshold_dbm`.
    pub fn wifi_busy_for(&self, listener: NodeId, powers: &PowerMap, threshold_dbm: f64) -> bool {
        self.active
            .iter()
            .any(|t| t.node != listener && powers.get(t.node, listener) >= threshold_dbm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(start: u64, end: u64) -> Interval {
        Interval::new(start, end)
    }

    #[test]
    fn beacon_inside_off_is_delivered() {
        // OFF window [20000, 21000), beacon at 20100.
        let on = [iv(0, 20_000), iv(21_000, 41_000)];
        assert_eq!(adjudicate(iv(20_100, 20_527), &on, &[]), Outcome::Delivered);
    }

    #[test]
    fn one_microsecond_into_on_is_dropped() {
        let on = [iv(21_000, 41_000)];
        assert_eq!(
            adjudicate(iv(20_574, 21_001), &on, &[]),
            Outcome::DroppedOverlapOn
        );
        // Ending exactly at the ON start is not an overlap.
        assert_eq!(adjudicate(iv(20_573, 21_000), &on, &[]), Outcome::Delivered);
    }

    #[test]
    fn ack_overlapping_on_drops_unicast() {
        // 300-byte probe response: 420 µs frame + 16 SIFS + 72 ACK = 508.
        let on = [iv(21_000, 41_000)];
        let frame_end = 20_500 + 420;
        assert!(frame_end < 21_000);
        assert_eq!(
            adjudicate(iv(20_500, 20_500 + 508), &on, &[]),
            Outcome::DroppedOverlapOn
        );
    }

    #[test]
    fn wifi_overlap_is_collision() {
        assert_eq!(
            adjudicate(iv(100, 527), &[], &[iv(500, 700)]),
            Outcome::DroppedCollision
        );
        assert_eq!(
            adjudicate(iv(100, 527), &[iv(0, 50)], &[iv(527, 700)]),
            Outcome::Delivered
        );
    }

    #[test]
    fn channel_records_mutual_overlap() {
        let mut ch = ChannelState::default();
        let tx = |id, node, start, end| Transmission {
            id,
            node,
            kind: PacketKind::Beacon,
            dest: None,
            interval: iv(start, end),
            lte_on_seen: Vec::new(),
            wifi_overlaps: Vec::new(),
        };
        ch.begin(tx(1, 1, 0, 427));
        ch.begin(tx(2, 2, 0, 2108));
        ch.lte_on(iv(400, 20_400));
        let a = ch.finish(1).unwrap();
        let b = ch.finish(2).unwrap();
        assert_eq!(a.outcome(), Outcome::DroppedOverlapOn);
        assert_eq!(a.wifi_overlaps, vec![iv(0, 2108)]);
        assert_eq!(b.wifi_overlaps, vec![iv(0, 427)]);
        assert!(ch.finish(1).is_none());
    }

    #[test]
    fn link_lookup_and_validation() {
        let links = LinkTable {
            default_dbm: -50.0,
            overrides: vec![LinkPower {
                tx: 1,
                rx: 0,
                dbm: -75.0,
            }],
        };
        let pm = links.resolve();
        assert_eq!(pm.get(1, 0), -75.0);
        assert_eq!(pm.get(0, 1), -50.0);
        assert!(links.validate(3).is_ok());
        assert_eq!(links.validate(1), Err(ConfigError::UnknownNode(1)));
        let bad = LinkTable {
            default_dbm: f64::NEG_INFINITY,
            overrides: vec![],
        };
        assert!(bad.validate(3).is_err());
    }
}
