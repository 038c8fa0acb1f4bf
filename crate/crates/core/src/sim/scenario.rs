//! Everything one simulation run needs, in a JSON-friendly shape.

use serde::{Deserialize, Serialize};

use super::channel::LinkTable;
use super::{NodeId, FIRST_CLIENT};
use crate::csat::CsatConfig;
use crate::error::ConfigError;
use crate::params::{DutyCycle, FrameSizes, PhyParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LteMode {
    Off,
    Fixed(DutyCycle),
    Csat(CsatConfig),
}

impl LteMode {
    /// Duty cycle in force when the run starts.
    pub fn initial_duty(&self) -> Option<DutyCycle> {
        match self {
            LteMode::Off => None,
            LteMode::Fixed(dc) => Some(*dc),
            LteMode::Csat(c) => Some(c.initial_duty()),
        }
    }
}

/// How Wi-Fi nodes get onto the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessMode {
    /// 802.11 DCF: DIFS, and a uniform backoff after any deferral.
    #[default]
    Dcf,
    /// No DIFS and no backoff; airtimes are rounded up to whole slots. A
    /// frame goes out the instant the channel is idle, which is the access
    /// rule the closed-form drop model assumes.
    SlottedImmediate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub phy: PhyParams,
    pub frame_sizes: FrameSizes,
    pub lte_mode: LteMode,
    /// Position inside the first LTE-U cycle at t = 0. Drawn from the seed
    /// when absent.
    pub lte_phase_us: Option<u64>,
    /// OFF windows of the first CSAT round already observed (as noise) at
    /// t = 0. Drawn from the seed when absent.
    pub csat_round_offset: Option<u32>,
    pub access_mode: AccessMode,
    /// Cell B: the AP whose beacons are measured.
    pub wifi_ap_enabled: bool,
    pub wifi_ap_start_us: u64,
    /// Cell A as a Wi-Fi AP with saturated 1500-byte downlink traffic.
    pub second_ap_enabled: bool,
    /// Mean rate of the Poisson probe-request stream, shared by all clients.
    pub probe_rate_per_s: f64,
    pub n_clients: u32,
    /// The first `associating_clients` clients run the full
    /// scan/authenticate/associate exchange; the rest only probe.
    pub associating_clients: u32,
    /// Associating clients may also start authentication from a beacon.
    pub passive_scanning: bool,
    pub links: LinkTable,
    pub noise_floor_dbm: f64,
    /// Carrier-sense threshold of every Wi-Fi node.
    pub wifi_cs_threshold_dbm: f64,
    /// Energy at the LTE-U BS at or above which a beacon counts as detected.
    /// In CSAT mode the controller's own threshold is used instead.
    pub lte_ed_threshold_dbm: f64,
    /// Attempts per unicast frame before it is discarded.
    pub retry_limit: u32,
    pub seed: u64,
    pub duration_us: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            phy: PhyParams::table1(),
            frame_sizes: FrameSizes::default(),
            lte_mode: LteMode::Off,
            lte_phase_us: None,
            csat_round_offset: None,
            access_mode: AccessMode::Dcf,
            wifi_ap_enabled: true,
            wifi_ap_start_us: 0,
            second_ap_enabled: false,
            probe_rate_per_s: 5.0,
            n_clients: 4,
            associating_clients: 1,
            passive_scanning: true,
            links: LinkTable::default(),
            noise_floor_dbm: -95.0,
            wifi_cs_threshold_dbm: -82.0,
            lte_ed_threshold_dbm: -70.0,
            retry_limit: 7,
            seed: 0,
            duration_us: 300_000_000,
        }
    }
}

impl Scenario {
    /// Node ids in use: the LTE-U BS, both APs (present even when disabled)
    /// and the clients.
    pub fn node_count(&self) -> u32 {
        FIRST_CLIENT + self.n_clients
    }

    pub fn client_ids(&self) -> impl Iterator<Item = NodeId> {
        FIRST_CLIENT..self.node_count()
    }

    pub fn ed_threshold_dbm(&self) -> f64 {
        match &self.lte_mode {
            LteMode::Csat(c) => c.ed_threshold_dbm,
            _ => self.lte_ed_threshold_dbm,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.phy.validate()?;
        if self.duration_us == 0 {
            return Err(ConfigError::NonPositive("duration_us"));
        }
        if self.retry_limit == 0 {
            return Err(ConfigError::NonPositive("retry_limit"));
        }
        if !self.probe_rate_per_s.is_finite() || self.probe_rate_per_s < 0.0 {
            return Err(ConfigError::ProbeRate(self.probe_rate_per_s));
        }
        if self.associating_clients > self.n_clients {
            return Err(ConfigError::AssociatingClients {
                associating: self.associating_clients,
                clients: self.n_clients,
            });
        }
        match &self.lte_mode {
            LteMode::Off => {}
            LteMode::Fixed(dc) => dc.validate()?,
            LteMode::Csat(c) => c.validate()?,
        }
        if let (Some(phase), Some(dc)) = (self.lte_phase_us, self.lte_mode.initial_duty()) {
            if phase >= dc.cycle_us() {
                return Err(ConfigError::LtePhase {
                    phase,
                    cycle: dc.cycle_us(),
                });
            }
        }
        for (name, v) in [
            ("noise_floor_dbm", self.noise_floor_dbm),
            ("wifi_cs_threshold_dbm", self.wifi_cs_threshold_dbm),
            ("lte_ed_threshold_dbm", self.lte_ed_threshold_dbm),
        ] {
            if !v.is_finite() {
                return Err(ConfigError::NotFinite(name));
            }
        }
        self.links.validate(self.node_count())?;
        let probes = self.n_clients > 0 && self.probe_rate_per_s > 0.0;
        let lte = self.lte_mode != LteMode::Off;
        if !(self.wifi_ap_enabled || self.second_ap_enabled || probes || lte) {
            return Err(ConfigError::NoTransmitter);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
