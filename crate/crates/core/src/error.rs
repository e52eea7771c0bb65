use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported field Q(sqrt({0})): only norm-Euclidean imaginary quadratic fields d in {{-1,-2,-3,-7,-11}} are supported")]
    UnsupportedField(i64),

    #[error("elements belong to different fields (d = {0} vs d = {1})")]
    FieldMismatch(i64, i64),

    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("Gram matrix is not definite")]
    NotDefinite,

    #[error("enumeration budget exhausted after {nodes} nodes ({partial} partial results)")]
    BudgetExceeded { nodes: u64, partial: usize },

    #[error("lattice `{0}` is degenerate")]
    DegenerateLattice(String),

    #[error("Hermitian form is degenerate")]
    DegenerateForm,

    #[error("zero vector")]
    ZeroVector,

    #[error("vector is isotropic")]
    IsotropicVector,

    #[error("vector is not primitive")]
    NotPrimitive,

    #[error("vector must have negative norm, got {0}")]
    NonNegativeNorm(String),

    #[error("trace form has non-integral entry at ({0}, {1})")]
    NonIntegralTraceForm(usize, usize),

    #[error("{0} is not a unit different from 1")]
    NotUnit(String),

    #[error("wrong signature: expected {expected}, found ({p},{q})")]
    WrongSignature {
        expected: String,
        p: usize,
        q: usize,
    },

    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),

    #[error("subspace is not isotropic")]
    NotIsotropic,

    #[error("subspace is not saturated in the lattice")]
    NotSaturated,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("schema error in entry `{entry}` at `{path}`: {message}")]
    Schema {
        entry: String,
        path: String,
        message: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown {kind} `{name}`")]
    UnknownEntry { kind: String, name: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
