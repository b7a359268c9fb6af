use thiserror::Error;

/// Errors raised by the surface construction and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node abscissae must be strictly increasing ({axis} axis, index {index})")]
    NonMonotoneNodes { axis: char, index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid rectangle [{a}, {b}] x [{c}, {d}]")]
    InvalidRect { a: f64, b: f64, c: f64, d: f64 },

    #[error("endpoint index {k} is neither 0 nor {last}")]
    BadEndpointIndex { k: usize, last: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("point {0} lies outside the domain")]
    OutOfDomain(f64),

    #[error("vertical scaling {0} is outside (-1, 1)")]
    ScalingOutOfRange(f64),

    #[error("system is not contractive: {0}")]
    NonContractive(String),

    #[error("sampled field does not cover the system domain")]
    MismatchedDomain,

    #[error("systems do not share the same node geometry")]
    GeometryMismatch,

    #[error("gamma function pole at {0}")]
    PoleAtNonpositiveInteger(f64),

    #[error("invalid fractional order: {0}")]
    InvalidOrder(String),

    #[error("Mittag-Leffler series did not converge for argument {x} (order {lambda})")]
    SeriesBudgetExceeded { lambda: f64, x: f64 },

    #[error("Laplace-type kernels need a domain with a > 0 and c > 0 (got a = {a}, c = {c})")]
    DomainViolation { a: f64, c: f64 },

    #[error("Sumudu scale parameters must be nonzero")]
    ZeroScale,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Name of the violated invariant, as used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonMonotoneNodes { .. } => "NonMonotoneNodes",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidRect { .. } => "InvalidRect",
            Error::BadEndpointIndex { .. } => "BadEndpointIndex",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::ScalingOutOfRange(_) => "ScalingOutOfRange",
            Error::NonContractive(_) => "NonContractive",
            Error::MismatchedDomain => "MismatchedDomain",
            Error::GeometryMismatch => "GeometryMismatch",
            Error::PoleAtNonpositiveInteger(_) => "PoleAtNonpositiveInteger",
            Error::InvalidOrder(_) => "InvalidOrder",
            Error::SeriesBudgetExceeded { .. } => "SeriesBudgetExceeded",
            Error::DomainViolation { .. } => "DomainViolation",
            Error::ZeroScale => "ZeroScale",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
