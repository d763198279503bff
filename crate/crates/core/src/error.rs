use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock space dimension must be at least 1")]
    EmptySpace,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("truncation inadequate: |alpha|^2 = {alpha_sq} needs dim >= {required:.1}, space has {dim}")]
    TruncationInadequate { alpha_sq: f64, required: f64, dim: usize },

    #[error("superposition vanishes (norm^2 = {norm_sq:e})")]
    ZeroState { norm_sq: f64 },

    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace deviates from 1 by {deviation:e}")]
    TraceNotUnit { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("basis is not orthonormal (max |<i|j> - delta_ij| = {deviation:e})")]
    NonOrthonormalBasis { deviation: f64 },

    #[error("basis captures only {captured} of the trace")]
    IncompleteBasis { captured: f64 },

    #[error("invalid spectral density: {0}")]
    InvalidDensity(String),

    #[error("frequency {omega} lies outside the tabulated hull [{lo}, {hi}]")]
    OutOfHull { omega: f64, lo: f64, hi: f64 },

    #[error("frequency {omega} is not inside the support of the spectral density")]
    OutsideSupport { omega: f64 },

    #[error("principal-value quadrature did not converge (error estimate {estimate:e})")]
    QuadratureNonConvergence { estimate: f64 },

    #[error("free system: zero coupling at the bare frequency gives no decaying pole")]
    FreeSystem,

    #[error("pole width must be positive and finite, got {0}")]
    InvalidPole(f64),

    #[error("pole ladder needs n_max >= 1")]
    EmptyLadder,

    #[error("coefficient lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("negative time {0} queried on a decaying mode")]
    NegativeTime(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mode expansion has no decay modes")]
    EmptyExpansion,

    #[error("degenerate expansion: amplitude sum {sum:e} vanishes against total {total:e}")]
    DegenerateExpansion { sum: f64, total: f64 },

    #[error("logarithm undefined: amplitude sum {0} is not positive")]
    NonPositiveAmplitudeSum(f64),

    #[error("samples are not uniformly spaced (sample {index})")]
    NonUniformSampling { index: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("rank deficiency: data supports {rank} modes, {requested} requested")]
    RankDeficient { rank: usize, requested: usize },

    #[error("mode extraction failed for entry ({row}, {col}): {source}")]
    EntryExtraction { row: usize, col: usize, source: Box<Error> },

    #[error("entrywise expansion misses entry ({row}, {col}) by {deviation:e} at t = {time}")]
    RoundTrip { row: usize, col: usize, time: f64, deviation: f64 },

    #[error("time grids differ")]
    GridMismatch,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("parse failure: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
