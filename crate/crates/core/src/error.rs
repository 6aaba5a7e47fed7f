use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("dimension too high: W = {work} exceeds the cap of {cap}")]
    DimensionTooHigh { work: usize, cap: usize },
    #[error("{points} points exceed the naive oracle limit of {limit}")]
    TooLargeForOracle { points: usize, limit: usize },
    #[error("singular simplex")]
    SingularSimplex,
    #[error("target lies outside the simplex affine span (residual {residual:e})")]
    OutsideAffineSpan { residual: f64 },
    #[error("target lies outside the simplex (min weight {min_weight:e})")]
    OutsideSimplex { min_weight: f64 },
    #[error("unknown phase `{0}`")]
    UnknownPhase(String),
    #[error("empty grid: {0}")]
    EmptyGrid(String),
    #[error("unknown demo model `{0}`")]
    UnknownDemo(String),
    #[error("{phases} phases exceed the maximum of {max} coexisting phases for W = {work}")]
    ExceedsMaxCoexistence {
        work: usize,
        phases: usize,
        max: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Legendre transform is not unique: {0}")]
    NonConvexTransform(String),
    #[error("unknown axis `{0}`")]
    AxisUnknown(String),
    #[error("isopleth slice contains {found} points, at least {needed} required")]
    EmptySlice { found: usize, needed: usize },
    #[error("inconsistent isopleth constraint: {0}")]
    InconsistentConstraint(String),
    #[error("unsupported axis count {0} for this format")]
    UnsupportedAxisCount(usize),
    #[error("schema version mismatch: expected `{expected}`, found `{found}`")]
    SchemaVersionMismatch { expected: String, found: String },
    #[error("validation error at {pointer}: {message}")]
    Validation { pointer: String, message: String },
    #[error("missing elemental reference for `{0}`")]
    MissingElementalReference(String),
    #[error("numerical degeneracy could not be resolved: {0}")]
    NumericalDegeneracy(String),
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateInput(_)
            | Error::SingularSimplex
            | Error::NumericalDegeneracy(_)
            | Error::NonConvexTransform(_) => 3,
            _ => 2,
        }
    }
}
