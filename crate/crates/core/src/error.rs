use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 8 nodes per direction, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("under-resolved geometry: intersection ({x:.6}, {y:.6}) lost node {node} to an intersection {separation:.3e} away")]
    UnderResolved {
        x: f64,
        y: f64,
        node: usize,
        separation: f64,
    },

    #[error("degenerate least-squares stencil at node {node}")]
    DegenerateStencil { node: usize },

    #[error("ghost node {node} has no exterior node within two stencil hops (geometry too thin)")]
    ThinGeometry { node: usize },

    #[error("degenerate normal at node {node}: |grad phi| = {magnitude:.3e}")]
    DegenerateNormal { node: usize, magnitude: f64 },

    #[error("redistancing did not converge after {iterations} iterations (max update {max_update:.3e})")]
    RedistanceNotConverged { iterations: usize, max_update: f64 },

    #[error("non-finite field value at node {node} during step {step}")]
    Unstable { step: usize, node: usize },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("config not found: {0}")]
    ConfigNotFound(PathBuf),

    #[error("query point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("sampling band contains no nodes")]
    EmptySample,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable one-word category, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GridTooSmall { .. } => "grid-too-small",
            Error::InvalidDomain(_) => "invalid-domain",
            Error::InvalidShape(_) => "invalid-shape",
            Error::UnderResolved { .. } => "under-resolved",
            Error::DegenerateStencil { .. } => "degenerate-stencil",
            Error::ThinGeometry { .. } => "thin-geometry",
            Error::DegenerateNormal { .. } => "degenerate-normal",
            Error::RedistanceNotConverged { .. } => "redistance-not-converged",
            Error::Unstable { .. } => "unstable",
            Error::Config { .. } => "config",
            Error::ConfigNotFound(_) => "config-not-found",
            Error::OutsideDomain { .. } => "outside-domain",
            Error::EmptySample => "empty-sample",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
        }
    }

    /// Errors caused by the invocation itself (missing or malformed config)
    /// rather than by the computation.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::ConfigNotFound(_) | Error::Parse { .. })
    }

    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
