//! Configuration files, output formats and the command-line driver.
//!
//! Exit statuses: 0 on success, 2 for invalid input (including usage
//! errors), 3 for numerical failures. Failures also print a one-line JSON
//! object `{"error": {"kind", "message", "exit_code"}}` on standard error.

pub mod cli;
pub mod config;
pub mod format;
pub mod output;

pub use cli::{dispatch, simulate, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};
pub use config::{parse_config, parse_config_str, Format, InitialSpec, OutputSpec, RunConfig};
pub use format::{num, Json};
