use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use gsq_core::{parse_config, validate, SystemConfig};

/// Error carrying the process exit status: 1 for invalid models and failed
/// checks, 2 for usage and I/O problems.
#[derive(Debug)]
pub enum Failure {
    Invalid(anyhow::Error),
    Usage(anyhow::Error),
}

impl Failure {
    pub fn invalid(e: impl Into<anyhow::Error>) -> Self {
        Self::Invalid(e.into())
    }

    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Self::Usage(e.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Invalid(_) => 1,
            Self::Usage(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invalid(e) | Self::Usage(e) => write!(f, "{e:#}"),
        }
    }
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<SystemConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            Failure::usage(anyhow::anyhow!("config not found: {}", path.display()))
        } else {
            Failure::usage(anyhow::anyhow!("cannot read config {}: {e}", path.display()))
        }
    })?;
    let config = parse_config(&text)
        .map_err(|e| Failure::invalid(anyhow::anyhow!("{}: {e}", path.display())))?;
    let report = validate(&config);
    if !report.is_ok() {
        return Err(Failure::invalid(anyhow::anyhow!(
            "{}: invalid configuration\n{report}",
            path.display()
        )));
    }
    Ok(config)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::usage(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}
