//! Scenario files, trajectory and summary output, parameter sweeps.
//!
//! The `pelletctl` binary is a thin wrapper over [`run`], [`sweep`] and the
//! core crate; everything here is usable as a library too.

mod error;
pub mod output;
pub mod schema;
pub mod sweep;

pub use error::CliError;
pub use output::{
    evaluate, format_sci, render_svg, run, write_trajectory_csv, RunOptions, RunOutcome, Summary,
};
pub use schema::{emit_scenario, parse_scenario, ScenarioFile};
pub use sweep::{sweep, write_sweep_csv, Axis, SweepRow};
