use std::path::PathBuf;

use thiserror::Error;

use crate::eigensolver::EigenResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("adaptive quadrature did not reach tolerance {tol:e} (estimate {estimate:e}, error {error:e})")]
    NonConvergedQuadrature { tol: f64, estimate: f64, error: f64 },

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("cells [{0}, {1}] and [{2}, {3}] overlap")]
    InvalidCells(f64, f64, f64, f64),

    #[error("point {0} lies on the boundary of the domain")]
    OnBoundary(f64),

    #[error("bad family parameters: {0}")]
    BadParameters(String),

    #[error("exterior set is empty")]
    EmptySet,

    #[error("Dirichlet and Neumann sets interleave beyond the collar on the {side} side")]
    MixedFarField { side: &'static str },

    #[error("piecewise-constant elements need s < 1/2 (got s = {0})")]
    IncompatibleScheme(f64),

    #[error("mesh size h = {h} does not resolve a partition feature of length {feature} (need h <= feature/4)")]
    UnderResolved { h: f64, feature: f64 },

    #[error("stiffness entry ({row}, {col}) failed its quadrature certificate (relative change {change:e})")]
    EntryToleranceFailure { row: usize, col: usize, change: f64 },

    #[error("stiffness entry diverges for touching cells at s = {0}")]
    DivergentEntry(f64),

    #[error("exterior Neumann DOF {0} has no interaction with the domain")]
    SingularExteriorBlock(usize),

    #[error("inverse iteration did not converge in {} iterations", .0.iterations)]
    MaxIterExceeded(Box<EigenResult>),

    #[error("the pencil (K, M) is not positive semidefinite")]
    IndefinitePencil,

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short tag used in experiment records.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonConvergedQuadrature { .. } => "non_converged_quadrature",
            Error::DivergentIntegral(_) => "divergent_integral",
            Error::InvalidCells(..) => "invalid_cells",
            Error::OnBoundary(_) => "on_boundary",
            Error::BadParameters(_) => "bad_parameters",
            Error::EmptySet => "empty_set",
            Error::MixedFarField { .. } => "mixed_far_field",
            Error::IncompatibleScheme(_) => "incompatible_scheme",
            Error::UnderResolved { .. } => "under_resolved",
            Error::EntryToleranceFailure { .. } => "entry_tolerance_failure",
            Error::DivergentEntry(_) => "divergent_entry",
            Error::SingularExteriorBlock(_) => "singular_exterior_block",
            Error::MaxIterExceeded(_) => "max_iter_exceeded",
            Error::IndefinitePencil => "indefinite_pencil",
            Error::Inconclusive(_) => "inconclusive",
            Error::DegenerateData(_) => "degenerate_data",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }
}
