//! Discrete-event simulation of one shared unlicensed channel.

pub mod assoc;
pub mod channel;
pub mod engine;
pub mod event;
pub mod lte;
pub mod mac;
pub mod scenario;
pub mod trace;

pub use engine::run;

pub type NodeId = u32;

/// The LTE-U base station.
pub const LTE_BS: NodeId = 0;
/// Cell B: the AP whose beacons are measured.
pub const AP_B: NodeId = 1;
/// Cell A when it runs as a saturated Wi-Fi AP instead of LTE-U.
pub const AP_A: NodeId = 2;
pub const FIRST_CLIENT: NodeId = 3;
