use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    #[error("invalid hypergeometric parameters: {0}")]
    HypergeometricParameter(String),

    #[error("hypergeometric series diverges at z = 1 (c - a - b = {0} <= 0)")]
    Divergent(f64),

    #[error("hypergeometric argument z = {0} outside the supported range")]
    ArgumentRange(f64),

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("coincident points")]
    CoincidentPoints,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside the closed half-space x1 >= 0 (x1 = {0})")]
    OutsideHalfSpace(f64),

    #[error("evaluation point coincides with mesh node {node}; use the trace operation")]
    AtNode { node: usize },

    #[error(
        "evaluation point at distance {distance:.3e} from the surface is closer than half the \
         local node spacing ({spacing:.3e}); quadrature is unreliable there"
    )]
    NearSurface { distance: f64, spacing: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("singular system: smallest pivot magnitude {pivot:.3e} at column {column}")]
    Singular { pivot: f64, column: usize },

    #[error("manufactured solution `{name}` failed the residual gate: residual {residual:.3e}")]
    RegistrationGate { name: String, residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
