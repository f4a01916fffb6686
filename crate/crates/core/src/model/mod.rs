//! Configuration vocabulary shared by the simulator, the analytic module and
//! the command-line front end.

mod config;
mod distribution;
mod file;
mod validate;

pub use config::{BufferPolicy, GroupSpec, ResidualPolicy, SystemConfig, ThresholdPair};
pub use distribution::ServiceDistribution;
pub use file::{parse_config, render_config, ConfigError};
pub use validate::{validate, ValidationReport, Violation};
