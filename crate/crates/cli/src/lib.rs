//! Command line harness over `krein_core`: instance and report files, seeded
//! instance generation, and the `verify-all` batch of cross-checks.

pub mod commands;
pub mod error;
pub mod generate;
pub mod instance;
pub mod report;
pub mod verify;

pub use commands::{resolve_tolerances, run_command, Command, RunOptions, DEFAULT_SAMPLES};
pub use error::{CliError, Result};
pub use generate::{gen_instance, GenParams, Kind};
pub use instance::{Instance, ToleranceOverrides};
pub use report::Report;

/// Environment variable naming a file of `tol_*` lines used as the default
/// tolerance profile.
pub const TOLERANCE_ENV: &str = "KREIN_TOLERANCES";
