use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {0:?} as a rational number")]
pub struct ParseRationalError(pub String);

/// Why a distance matrix is not a valid finite metric.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("the space has no points")]
    Empty,
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("{labels} labels for a {size}x{size} matrix")]
    LabelCount { labels: usize, size: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown base point {0:?}")]
    UnknownBase(String),
    #[error("base index {0} out of range")]
    BaseOutOfRange(usize),
    #[error("d({0},{1}) != d({1},{0})")]
    NotSymmetric(usize, usize),
    #[error("d({0},{1}) must be positive")]
    NegativeOrZeroOffDiagonal(usize, usize),
    #[error("d({0},{0}) must be zero")]
    NonzeroDiagonal(usize),
    #[error("triangle inequality fails: d({0},{2}) > d({0},{1}) + d({1},{2})")]
    TriangleViolation(usize, usize, usize),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("no point labelled {0:?}")]
    UnknownLabel(String),
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("space is not 0-hyperbolic: quadruple {0:?} violates the four-point condition")]
    NotZeroHyperbolic([usize; 4]),
    #[error("tree is malformed: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtremalError {
    #[error("Lipschitz norm {0} exceeds one")]
    NormExceedsOne(String),
    #[error("the base point must belong to the extension domain")]
    NotOnePointed,
    #[error("partial function has Lipschitz constant {0} > 1 on its domain")]
    NotOneLipschitz(String),
    #[error("node {0} is not a Steiner branching point of conv(M)")]
    NoMissingBranchPoint(usize),
    #[error("points must be distinct")]
    SamePoint,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("sep(M) = 0: some point lies on a geodesic between two others")]
    SeparationZero,
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Failures reading or writing the JSON/CSV interchange formats.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Failures of a report-producing command.
#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}
