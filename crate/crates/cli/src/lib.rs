//! Scenario presets, seed batches and the validation report behind the
//! `coexist` binary.

pub mod batch;
pub mod error;
pub mod preset;
pub mod table;
pub mod validate;

pub use batch::{load_config, run_batch, BatchEcho, BatchResult};
pub use error::CliError;
pub use preset::Preset;
pub use validate::{validate, Check, Report, Status};
