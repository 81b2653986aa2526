use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("parity mismatch: representation has n = {n}, twist is {twist}")]
    ParityMismatch { n: usize, twist: &'static str },

    #[error("twisting spaces have unequal dimensions ({plus} vs {minus})")]
    UnequalTwist { plus: usize, minus: usize },

    #[error("map {index} is not skew-adjoint (residual {residual:.3e})")]
    NotSkewAdjoint { index: usize, residual: f64 },

    #[error("matrix {index} is not Hermitian and odd (residual {residual:.3e})")]
    NotHermitianOdd { index: usize, residual: f64 },

    #[error("Z(x)^2 is not scalar (residual {residual:.3e}); use a discretization oracle")]
    NonScalarSquare { residual: f64 },

    #[error("quadratic form is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("L_{j} and L_{k} do not commute (residual {residual:.3e})")]
    NonCommuting { j: usize, k: usize, residual: f64 },

    #[error("eigenvalue {value:.3e} is too close to zero to assign a sign")]
    DegenerateEigenvalue { value: f64 },

    #[error("proper singular point condition fails: {0}")]
    Improper(String),

    #[error("local Fredholm condition ({condition}) fails: {detail}")]
    ConditionViolated { condition: u8, detail: String },

    #[error("no clear spectral gap (best ratio {best_ratio:.3}); lowest eigenvalues {eigenvalues:?}")]
    InconclusiveGap { best_ratio: f64, eigenvalues: Vec<f64> },

    #[error("basis cutoff {cutoff} too small: kernel counts {counts:?} change at cutoff {next}")]
    CutoffTooSmall {
        cutoff: usize,
        next: usize,
        counts: [usize; 4],
    },

    #[error("degenerate linearization (|det| = {det:.3e})")]
    DegenerateLinearization { det: f64 },

    #[error("zero vector where a nonzero one is required")]
    ZeroVector,

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("singular point {index}: {source}")]
    AtPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("path sample {index}: {source}")]
    AtSample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips `AtPoint` / `AtSample` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPoint { source, .. } | Error::AtSample { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures of an input precondition, as opposed to numerical
    /// trouble or an unresolved spectral gap.
    pub fn is_precondition(&self) -> bool {
        !matches!(
            self.root(),
            Error::InconclusiveGap { .. } | Error::CutoffTooSmall { .. } | Error::Numerical(_)
        )
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(
            self.root(),
            Error::InconclusiveGap { .. } | Error::CutoffTooSmall { .. }
        )
    }
}
