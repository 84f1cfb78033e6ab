//! Scenario runner behind the `sbchain` command line tool.

mod config;
mod output;
mod scenarios;

pub use config::{
    parse_config, CircuitConfig, ExperimentConfig, GroundMethod, ModelConfig, NumericsConfig, PacketConfig,
    QubitSite, Scenario, SusceptibilityConfig,
};
pub use output::{ExperimentRecord, Table};
pub use scenarios::{
    bias_trace, build_model, evolve_recorded, group_velocity, packet_amplitudes, par_map, revival_time, run,
    run_circuit, run_emit, run_ground, run_scatter, run_susceptibility, scatter_once, support_width,
    ScatterOutcome, Trajectory,
};

use crate::error::Error;

/// Process exit status for a failed run: 2 for configuration problems, 3
/// for convergence failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        Error::Convergence { .. } | Error::NonMonotoneEnergy { .. } => 3,
        _ => 1,
    }
}
