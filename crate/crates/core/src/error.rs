use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// Variants are grouped by the layer that raises them; the command layer maps
/// each group onto a process exit code (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // projective primitives
    #[error("point lies on the hyperplane at infinity (|x[m+1]| = {last:e})")]
    PointAtInfinity { last: f64 },
    #[error("point lies in the kernel of the projective map (|Bx| = {norm:e})")]
    InKernel { norm: f64 },
    #[error("frame is not in general position: {0}")]
    DegenerateFrame(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },
    #[error("matrix is not a rotation: {0}")]
    NotRotation(String),

    // camera geometry
    #[error("too few matches: need at least 8, got {0}")]
    TooFewMatches(usize),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("zero translation: epipolar geometry is undefined for a pure rotation")]
    ZeroTranslation,
    #[error("intrinsic matrix is singular")]
    SingularIntrinsics,
    #[error("matched point lies on the baseline (image of the epipole)")]
    EpipolarDegenerate,
    #[error("fundamental matrix has rank below two")]
    RankDeficient,

    // statistics
    #[error("sample is focal in marginal {marginal} (0-based): eigen-gap {gap:e} is below tolerance")]
    FocalSample { marginal: usize, gap: f64 },
    #[error("extrinsic covariance is singular (condition number {condition:e})")]
    SingularCovariance { condition: f64 },
    #[error("bootstrap skipped {skipped} of {total} resamples")]
    TooManySkipped { skipped: usize, total: usize },
    #[error("argument outside the domain: {0}")]
    DomainError(String),

    // files and simulation
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    ///
    /// 2 input error, 3 geometric degeneracy, 4 statistical degeneracy,
    /// 5 simulation failure.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Parse { .. } | Io(_) | InvalidInput(_) | DimensionMismatch { .. } | DomainError(_) => 2,
            PointAtInfinity { .. }
            | InKernel { .. }
            | DegenerateFrame(_)
            | SingularMatrix { .. }
            | NotRotation(_)
            | TooFewMatches(_)
            | DegenerateConfiguration(_)
            | ZeroTranslation
            | SingularIntrinsics
            | EpipolarDegenerate
            | RankDeficient => 3,
            FocalSample { .. } | SingularCovariance { .. } | TooManySkipped { .. } => 4,
            Simulation(_) => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
