//! Error categories mapped to process exit codes.

use bioq_core::geometry::GeometryError;
use bioq_core::mcs::FieldError;
use bioq_core::placement::PlacementError;
use bioq_core::spins::SpinError;
use bioq_core::topo::TopoError;

/// Category reported on stderr as `bioq: <category>: <message>`.
#[derive(Debug)]
pub enum CliError {
    /// Schema violations, domain errors, impossible geometry. Exit 2.
    Config(String),
    /// Numerical halts: non-finite fields, norm drift. Exit 3.
    Numerics(String),
    /// IO and everything else. Exit 1.
    Other(String),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError::Config(message.into())
    }

    pub fn numerics(message: impl Into<String>) -> CliError {
        CliError::Numerics(message.into())
    }

    pub fn other(message: impl Into<String>) -> CliError {
        CliError::Other(message.into())
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config-error",
            CliError::Numerics(_) => "numerics-error",
            CliError::Other(_) => "error",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerics(m) | CliError::Other(m) => m,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerics(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.category(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> CliError {
        CliError::Config(e.to_string())
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> CliError {
        match e {
            FieldError::NonFinite { .. } => CliError::Numerics(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SpinError> for CliError {
    fn from(e: SpinError) -> CliError {
        match e {
            SpinError::NormDrift { .. } => CliError::Numerics(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<TopoError> for CliError {
    fn from(e: TopoError) -> CliError {
        match e {
            TopoError::NonFiniteAmplitude(_) => CliError::Numerics(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<PlacementError> for CliError {
    fn from(e: PlacementError) -> CliError {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Other(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> CliError {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError::Other(e.to_string())
    }
}
