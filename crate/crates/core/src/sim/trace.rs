//! Event trace of one run and its CSV form.
//!
//! Columns: `t_us,event,node,packet_kind,outcome,duty_on_us,duty_off_us`.
//! The `outcome` column carries the per-event detail: a transmission
//! outcome, a window energy in dBm, a CSAT verdict, the duty cycle a switch
//! came from, an association phase or a retry count. Empty cells mean "not
//! applicable".

use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};

use super::assoc::AssocPhase;
use super::channel::Outcome;
use super::event::SimTime;
use super::NodeId;
use crate::error::TraceError;
use crate::params::{DutyCycle, PacketKind};

pub const TRACE_HEADER: &str = "t_us,event,node,packet_kind,outcome,duty_on_us,duty_off_us";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceEvent {
    LteOn,
    LteOff,
    BeaconDue,
    BeaconSuppressed,
    PacketArrival,
    TxStart,
    AckDue,
    TxComplete,
    BeaconDetected,
    SenseWindow,
    CsatDecision,
    CsatSwitch,
    AssocState,
    PacketDiscarded,
}

impl TraceEvent {
    const ALL: [TraceEvent; 14] = [
        TraceEvent::LteOn,
        TraceEvent::LteOff,
        TraceEvent::BeaconDue,
        TraceEvent::BeaconSuppressed,
        TraceEvent::PacketArrival,
        TraceEvent::TxStart,
        TraceEvent::AckDue,
        TraceEvent::TxComplete,
        TraceEvent::BeaconDetected,
        TraceEvent::SenseWindow,
        TraceEvent::CsatDecision,
        TraceEvent::CsatSwitch,
        TraceEvent::AssocState,
        TraceEvent::PacketDiscarded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::LteOn => "lte_on",
            TraceEvent::LteOff => "lte_off",
            TraceEvent::BeaconDue => "beacon_due",
            TraceEvent::BeaconSuppressed => "beacon_suppressed",
            TraceEvent::PacketArrival => "packet_arrival",
            TraceEvent::TxStart => "tx_start",
            TraceEvent::AckDue => "ack_due",
            TraceEvent::TxComplete => "tx_complete",
            TraceEvent::BeaconDetected => "beacon_detected",
            TraceEvent::SenseWindow => "sense_window",
            TraceEvent::CsatDecision => "csat_decision",
            TraceEvent::CsatSwitch => "csat_switch",
            TraceEvent::AssocState => "assoc_state",
            TraceEvent::PacketDiscarded => "packet_discarded",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.as_str() == s)
    }
}

/// Event-specific content of the `outcome` column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detail {
    None,
    Outcome(Outcome),
    /// Window energy, stored at 0.01 dB resolution so that the CSV form
    /// round-trips exactly.
    PowerDbm(f64),
    /// CSAT verdict: `true` when Wi-Fi was declared present.
    WifiDetected(bool),
    SwitchedFrom(DutyCycle),
    Assoc(AssocPhase),
    Retries(u32),
}

impl Detail {
    pub fn power(dbm: f64) -> Self {
        Detail::PowerDbm((dbm * 100.0).round() / 100.0)
    }
}

impl fmt::Display for Detail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Detail::None => Ok(()),
            Detail::Outcome(o) => f.write_str(o.as_str()),
            Detail::PowerDbm(p) => write!(f, "{p:.2}"),
            Detail::WifiDetected(true) => f.write_str("low"),
            Detail::WifiDetected(false) => f.write_str("high"),
            Detail::SwitchedFrom(dc) => write!(f, "from={dc}"),
            Detail::Assoc(p) => f.write_str(p.as_str()),
            Detail::Retries(n) => write!(f, "retries={n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t_us: SimTime,
    pub event: TraceEvent,
    pub node: NodeId,
    pub packet_kind: Option<PacketKind>,
    pub detail: Detail,
    /// LTE-U duty cycle in force, if the LTE-U BS is transmitting at all.
    pub duty: Option<DutyCycle>,
}

impl TraceRecord {
    fn write_csv(&self, out: &mut String) {
        let _ = write!(out, "{},{},{},", self.t_us, self.event.as_str(), self.node);
        if let Some(k) = self.packet_kind {
            out.push_str(k.as_str());
        }
        let _ = write!(out, ",{},", self.detail);
        if let Some(dc) = self.duty {
            let _ = write!(out, "{},{}", dc.t_on_us, dc.t_off_us);
        } else {
            out.push(',');
        }
        out.push('\n');
    }

    fn parse_csv(line: &str, line_no: usize) -> Result<Self, TraceError> {
        let err = |reason: String| TraceError::Parse {
            line: line_no,
            reason,
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(err(format!("expected 7 columns, found {}", cols.len())));
        }
        let t_us = cols[0]
            .parse()
            .map_err(|e| err(format!("t_us {:?}: {e}", cols[0])))?;
        let event = TraceEvent::parse(cols[1]).ok_or_else(|| err(format!("event {:?}", cols[1])))?;
        let node = cols[2]
            .parse()
            .map_err(|e| err(format!("node {:?}: {e}", cols[2])))?;
        let packet_kind = match cols[3] {
            "" => None,
            s => Some(PacketKind::parse(s).ok_or_else(|| err(format!("packet_kind {s:?}")))?),
        };
        let detail = parse_detail(event, cols[4]).ok_or_else(|| err(format!("outcome {:?}", cols[4])))?;
        let duty = match (cols[5], cols[6]) {
            ("", "") => None,
            (on, off) => {
                let on = on.parse().map_err(|e| err(format!("duty_on_us {on:?}: {e}")))?;
                let off = off.parse().map_err(|e| err(format!("duty_off_us {off:?}: {e}")))?;
                Some(DutyCycle {
                    t_on_us: on,
                    t_off_us: off,
                })
            }
        };
        Ok(Self {
            t_us,
            event,
            node,
            packet_kind,
            detail,
            duty,
        })
    }
}

fn parse_duty(s: &str) -> Option<DutyCycle> {
    let (on, off) = s.split_once('/')?;
    Some(DutyCycle {
        t_on_us: on.parse().ok()?,
        t_off_us: off.parse().ok()?,
    })
}

fn parse_detail(event: TraceEvent, s: &str) -> Option<Detail> {
    if s.is_empty() {
        return Some(Detail::None);
    }
    match event {
        TraceEvent::TxComplete => Outcome::parse(s).map(Detail::Outcome),
        TraceEvent::SenseWindow => s.parse().ok().map(Detail::PowerDbm),
        TraceEvent::CsatDecision => match s {
            "low" => Some(Detail::WifiDetected(true)),
            "high" => Some(Detail::WifiDetected(false)),
            _ => None,
        },
        TraceEvent::CsatSwitch => s.strip_prefix("from=").and_then(parse_duty).map(Detail::SwitchedFrom),
        TraceEvent::AssocState => AssocPhase::parse(s).map(Detail::Assoc),
        TraceEvent::PacketDiscarded => s
            .strip_prefix("retries=")
            .and_then(|n| n.parse().ok())
            .map(Detail::Retries),
        _ => None,
    }
}

/// Every row produced by one run, in processing order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceLog {
    pub records: Vec<TraceRecord>,
}

impl TraceLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(48 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            r.write_csv(&mut out);
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self, TraceError> {
        let mut lines = r.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim_end() != TRACE_HEADER {
            return Err(TraceError::Header(header));
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            records.push(TraceRecord::parse_csv(&line, i + 2)?);
        }
        Ok(Self { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> TraceLog {
        let duty = Some(DutyCycle::PCT95);
        let rec = |t_us, event, node, packet_kind, detail| TraceRecord {
            t_us,
            event,
            node,
            packet_kind,
            detail,
            duty,
        };
        TraceLog {
            records: vec![
                rec(0, TraceEvent::LteOn, 0, None, Detail::None),
                rec(5, TraceEvent::BeaconDue, 1, Some(PacketKind::Beacon), Detail::None),
                rec(20_034, TraceEvent::TxStart, 1, Some(PacketKind::Beacon), Detail::None),
                rec(
                    20_461,
                    TraceEvent::TxComplete,
                    1,
                    Some(PacketKind::Beacon),
                    Detail::Outcome(Outcome::Delivered),
                ),
                rec(21_000, TraceEvent::SenseWindow, 0, None, Detail::power(-50.004)),
                rec(21_000, TraceEvent::CsatDecision, 0, None, Detail::WifiDetected(true)),
                TraceRecord {
                    duty: Some(DutyCycle::PCT50),
                    ..rec(21_000, TraceEvent::CsatSwitch, 0, None, Detail::SwitchedFrom(DutyCycle::PCT95))
                },
                rec(30_000, TraceEvent::AssocState, 3, None, Detail::Assoc(AssocPhase::Associating)),
                rec(31_000, TraceEvent::PacketDiscarded, 3, Some(PacketKind::AuthRequest), Detail::Retries(7)),
                TraceRecord {
                    duty: None,
                    ..rec(32_000, TraceEvent::PacketArrival, 4, Some(PacketKind::ProbeRequest), Detail::None)
                },
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(lines.next(), Some("0,lte_on,0,,,20000,1000"));
        assert_eq!(lines.nth(2), Some("20461,tx_complete,1,beacon,delivered,20000,1000"));
        assert_eq!(lines.next(), Some("21000,sense_window,0,,-50.00,20000,1000"));
        assert_eq!(lines.nth(1), Some("21000,csat_switch,0,,from=20000/1000,20000,20000"));
        assert_eq!(csv.lines().last(), Some("32000,packet_arrival,4,probe_request,,,"));
    }

    #[test]
    fn csv_round_trip() {
        let log = sample();
        let back = TraceLog::read_csv(log.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            TraceLog::read_csv("t,event\n".as_bytes()),
            Err(TraceError::Header(_))
        ));
        let bad = format!("{TRACE_HEADER}\n0,lte_on,0,,,20000\n");
        assert!(matches!(
            TraceLog::read_csv(bad.as_bytes()),
            Err(TraceError::Parse { line: 2, .. })
        ));
        let bad = format!("{TRACE_HEADER}\n0,tx_complete,1,beacon,lost,,\n");
        assert!(TraceLog::read_csv(bad.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn power_detail_round_trips(dbm in -120.0f64..30.0) {
            let d = Detail::power(dbm);
            let parsed = parse_detail(TraceEvent::SenseWindow, &d.to_string()).unwrap();
            prop_assert_eq!(parsed, d);
        }
    }
}
