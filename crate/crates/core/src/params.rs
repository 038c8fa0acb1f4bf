//! Wi-Fi MAC/PHY timing constants, LTE-U duty cycles and airtime arithmetic.
//!
//! Every duration in this crate is an integer number of microseconds.
//! Fractional airtimes are rounded up so that channel occupancy is never
//! under-estimated.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Longest ON period the LTE-U forum allows, in microseconds.
pub const MAX_ON_US: u64 = 20_000;
/// Shortest OFF period the LTE-U forum allows, in microseconds.
pub const MIN_OFF_US: u64 = 1_000;

/// Wi-Fi timing constants used by both the closed-form model and the
/// event engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyParams {
    pub difs_us: u64,
    pub sifs_us: u64,
    /// Contention window `W`; backoff draws are uniform in `[0, cw_min - 1]`.
    pub cw_min: u32,
    pub slot_us: u64,
    pub preamble_us: u64,
    pub data_rate_mbps: u64,
    pub beacon_bytes: u64,
    pub ack_us: u64,
    pub beacon_interval_us: u64,
}

impl PhyParams {
    /// The 5 GHz OFDM constants at 6 Mbps: DIFS 34, SIFS 16, W = 16, 9 µs
    /// slots, 20 µs preamble, 305-byte beacons every 102.4 ms.
    pub const fn table1() -> Self {
        Self {
            difs_us: 34,
            sifs_us: 16,
            cw_min: 16,
            slot_us: 9,
            preamble_us: 20,
            data_rate_mbps: 6,
            beacon_bytes: 305,
            ack_us: 72,
            beacon_interval_us: 102_400,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let durations = [
            ("difs_us", self.difs_us),
            ("sifs_us", self.sifs_us),
            ("slot_us", self.slot_us),
            ("preamble_us", self.preamble_us),
            ("ack_us", self.ack_us),
            ("beacon_interval_us", self.beacon_interval_us),
            ("data_rate_mbps", self.data_rate_mbps),
        ];
        for (name, value) in durations {
            if value == 0 {
                return Err(ConfigError::NonPositive(name));
            }
        }
        if self.cw_min < 2 || !self.cw_min.is_power_of_two() {
            return Err(ConfigError::ContentionWindow(self.cw_min));
        }
        Ok(())
    }

    /// Payload time of `bytes` at the configured rate, rounded up.
    fn payload_us(&self, bytes: u64) -> u64 {
        (bytes * 8).div_ceil(self.data_rate_mbps)
    }

    /// Time on air of an unacknowledged frame of `bytes` bytes.
    pub fn frame_airtime(&self, bytes: u64) -> u64 {
        self.preamble_us + self.payload_us(bytes)
    }
}

impl Default for PhyParams {
    fn default() -> Self {
        Self::table1()
    }
}

/// Beacon time on air, `T_b` (427 µs with the default constants).
pub fn beacon_airtime(p: &PhyParams) -> u64 {
    p.frame_airtime(p.beacon_bytes)
}

/// Number of whole slots a beacon occupies, `ceil(T_b / t_s)`.
pub fn beacon_airtime_slots(p: &PhyParams) -> u64 {
    beacon_airtime(p).div_ceil(p.slot_us)
}

/// Full channel occupancy of an acknowledged frame: preamble, payload,
/// SIFS and the ACK.
pub fn unicast_airtime(p: &PhyParams, n_u: u64) -> u64 {
    p.frame_airtime(n_u) + p.sifs_us + p.ack_us
}

/// One LTE-U ON/OFF period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DutyCycle {
    pub t_on_us: u64,
    pub t_off_us: u64,
}

impl DutyCycle {
    /// 20 ms ON / 1 ms OFF, the forum maximum (~95%).
    pub const PCT95: Self = Self::from_parts(20_000, 1_000);
    /// 20 ms ON / 5 ms OFF.
    pub const PCT80: Self = Self::from_parts(20_000, 5_000);
    /// 20 ms ON / 20 ms OFF.
    pub const PCT50: Self = Self::from_parts(20_000, 20_000);
    /// 5 ms ON / 5 ms OFF.
    pub const PCT50_SHORT: Self = Self::from_parts(5_000, 5_000);

    const fn from_parts(t_on_us: u64, t_off_us: u64) -> Self {
        Self { t_on_us, t_off_us }
    }

    pub fn new(t_on_us: u64, t_off_us: u64) -> Result<Self, ConfigError> {
        let dc = Self { t_on_us, t_off_us };
        dc.validate()?;
        Ok(dc)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.t_on_us == 0 || self.t_on_us > MAX_ON_US {
            return Err(ConfigError::OnDuration(self.t_on_us));
        }
        if self.t_off_us < MIN_OFF_US {
            return Err(ConfigError::OffDuration(self.t_off_us));
        }
        Ok(())
    }

    pub fn cycle_us(&self) -> u64 {
        self.t_on_us + self.t_off_us
    }

    /// Fraction of each cycle the LTE-U BS transmits.
    pub fn fraction(&self) -> f64 {
        self.t_on_us as f64 / self.cycle_us() as f64
    }
}

impl fmt::Display for DutyCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.t_on_us, self.t_off_us)
    }
}

/// Frame types exchanged on the shared channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketKind {
    Beacon,
    ProbeRequest,
    ProbeResponse,
    AuthRequest,
    AuthResponse,
    AssocRequest,
    AssocResponse,
    Ack,
    Data,
}

impl PacketKind {
    pub const ALL: [PacketKind; 9] = [
        PacketKind::Beacon,
        PacketKind::ProbeRequest,
        PacketKind::ProbeResponse,
        PacketKind::AuthRequest,
        PacketKind::AuthResponse,
        PacketKind::AssocRequest,
        PacketKind::AssocResponse,
        PacketKind::Ack,
        PacketKind::Data,
    ];

    /// Whether the frame is followed by SIFS + ACK. Beacons and probe
    /// requests are broadcast.
    pub fn requires_ack(self) -> bool {
        !matches!(
            self,
            PacketKind::Beacon | PacketKind::ProbeRequest | PacketKind::Ack
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PacketKind::Beacon => "beacon",
            PacketKind::ProbeRequest => "probe_request",
            PacketKind::ProbeResponse => "probe_response",
            PacketKind::AuthRequest => "auth_request",
            PacketKind::AuthResponse => "auth_response",
            PacketKind::AssocRequest => "assoc_request",
            PacketKind::AssocResponse => "assoc_response",
            PacketKind::Ack => "ack",
            PacketKind::Data => "data",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for PacketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// MAC frame sizes in bytes for everything other than the beacon, whose
/// size lives in [`PhyParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSizes {
    pub probe_request: u64,
    pub probe_response: u64,
    pub auth: u64,
    pub assoc: u64,
    pub data: u64,
}

impl Default for FrameSizes {
    fn default() -> Self {
        Self {
            probe_request: 120,
            probe_response: 300,
            auth: 60,
            assoc: 120,
            data: 1500,
        }
    }
}

impl FrameSizes {
    pub fn bytes(&self, kind: PacketKind, phy: &PhyParams) -> u64 {
        match kind {
            PacketKind::Beacon => phy.beacon_bytes,
            PacketKind::ProbeRequest => self.probe_request,
            PacketKind::ProbeResponse => self.probe_response,
            PacketKind::AuthRequest | PacketKind::AuthResponse => self.auth,
            PacketKind::AssocRequest | PacketKind::AssocResponse => self.assoc,
            PacketKind::Ack => 14,
            PacketKind::Data => self.data,
        }
    }

    /// Channel occupancy of one frame of `kind`, including SIFS + ACK for
    /// acknowledged kinds.
    pub fn occupancy_us(&self, kind: PacketKind, phy: &PhyParams) -> u64 {
        let bytes = self.bytes(kind, phy);
        match kind {
            PacketKind::Ack => phy.ack_us,
            k if k.requires_ack() => unicast_airtime(phy, bytes),
            _ => phy.frame_airtime(bytes),
        }
    }
}
