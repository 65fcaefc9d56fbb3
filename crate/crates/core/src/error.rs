use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("sphere extinction: metric scale r0^2 - 2t = {scale:.3e} at t = {t}")]
    Extinction { t: f64, scale: f64 },

    #[error("positivity lost at t = {t}: min v = {min:.3e} (reduce the safety factor)")]
    PositivityLoss { t: f64, min: f64 },

    #[error("numerical instability at t = {t}: non-finite value in field")]
    Instability { t: f64 },

    #[error("singular estimate term at t = {t}: {what}")]
    Singular { t: f64, what: String },

    #[error("inadmissible function triple: {}", violated.join("; "))]
    Inadmissible { violated: Vec<String> },

    #[error("oracle self-check failed: {0}")]
    OracleGate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<LabError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Self::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for failures of the time integrator rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Self::Stage { source, .. } => source.is_numerical(),
            Self::Extinction { .. } | Self::PositivityLoss { .. } | Self::Instability { .. } | Self::OracleGate(_) => true,
            _ => false,
        }
    }

    /// Process exit code: 1 for a refused triple, 3 for numerical failures,
    /// 2 for everything the caller supplied wrongly.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Stage { source, .. } => source.exit_code(),
            Self::Inadmissible { .. } => 1,
            e if e.is_numerical() => 3,
            Self::Singular { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
