//! LTE-U / Wi-Fi coexistence on one unlicensed channel: a closed-form
//! beacon-loss model, an energy-based CSAT duty-cycle controller and a
//! deterministic discrete-event simulator.

pub mod analytic;
pub mod csat;
pub mod error;
pub mod metrics;
pub mod params;
pub mod scalar;
pub mod sim;
pub mod stats;

pub use analytic::AnalyticResult;
pub use csat::{CsatConfig, CsatState};
pub use error::{ConfigError, CsatError, MetricsError, ModelError, StatsError, TraceError};
pub use metrics::{summarize, CdfPoint, RunMetrics};
pub use params::{DutyCycle, FrameSizes, PacketKind, PhyParams};
pub use scalar::Scalar;
pub use sim::run;
pub use sim::scenario::{AccessMode, LteMode, Scenario};
pub use sim::trace::TraceLog;

pub type AnalyticResult64 = AnalyticResult<f64>;
pub type AnalyticResult32 = AnalyticResult<f32>;
pub type CdfPoint64 = CdfPoint<f64>;
