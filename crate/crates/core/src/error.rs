use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Every variant maps to a stable, machine-readable code via [`Error::code`];
/// the CLI forwards these codes in its JSON error reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value {value} at quadrature node {node} (point {x}, {y})")]
    Evaluation { node: usize, x: f64, y: f64, value: f64 },

    #[error("matrix is not positive definite at pivot {pivot} (pivot value {value:e}); {hint}")]
    Conditioning { pivot: usize, value: f64, hint: String },

    #[error("no sign change on [{a}, {b}]: g(a) = {fa}, g(b) = {fb}")]
    Bracket { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),

    #[error("unsupported droplet geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("droplet regularity violated: {0}")]
    Regularity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("evaluation on the droplet boundary is undefined: {0}")]
    BoundaryEvaluation(String),

    #[error("degenerate Berezin root: K(w, w) = {0:e}")]
    DegenerateRoot(f64),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("invalid expression: {0}")]
    Expression(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier for machine consumption.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "E_PARAMETER",
            Error::Evaluation { .. } => "E_EVALUATION",
            Error::Conditioning { .. } => "E_CONDITIONING",
            Error::Bracket { .. } => "E_BRACKET",
            Error::InvalidPotential(_) => "E_INVALID_POTENTIAL",
            Error::UnsupportedPotential(_) => "E_UNSUPPORTED_POTENTIAL",
            Error::UnsupportedGeometry(_) => "E_UNSUPPORTED_GEOMETRY",
            Error::Regularity(_) => "E_REGULARITY",
            Error::Domain(_) => "E_DOMAIN",
            Error::Resolution(_) => "E_RESOLUTION",
            Error::BoundaryEvaluation(_) => "E_BOUNDARY",
            Error::DegenerateRoot(_) => "E_DEGENERATE_ROOT",
            Error::Sampler(_) => "E_SAMPLER",
            Error::Parse { .. } => "E_PARSE",
            Error::Schema(_) => "E_SCHEMA",
            Error::Expression(_) => "E_EXPRESSION",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }

    /// True for errors caused by malformed user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_)
                | Error::InvalidPotential(_)
                | Error::UnsupportedPotential(_)
                | Error::UnsupportedGeometry(_)
                | Error::Parse { .. }
                | Error::Schema(_)
                | Error::Expression(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
