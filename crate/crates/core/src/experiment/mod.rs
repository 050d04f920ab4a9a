//! Reproducible experiments driven by config files: simulation runs,
//! networked sessions, loss sweeps and leakage reports.

mod commands;
mod config;

pub use commands::{
    cmd_alice, cmd_bob, cmd_report, cmd_simulate, cmd_sweep, leakage_report, Endpoint, LeakageReport, SimulateSummary,
    CLICKS_FILE, CURVE_FILE, PULSES_FILE, SUMMARY_FILE,
};
pub use config::{load_code_set, ExperimentConfig};

use crate::ldpc::LdpcError;
use crate::protocol::ProtocolError;
use crate::security::SecurityError;
use crate::session::SessionError;
use crate::sim::SimError;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Security(#[from] SecurityError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("report: {0}")]
    Report(String),
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}
