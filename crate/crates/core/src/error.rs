use alloc::string::String;
use alloc::vec::Vec;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("basis dimension {dim} exceeds the cap of {cap}")]
    DimensionTooLarge { dim: u128, cap: usize },

    #[error("truncation too small: neglected mass {tail:.3e} exceeds {tol:.3e}; sufficient cutoffs {required:?}")]
    TruncationTooSmall {
        tail: f64,
        tol: f64,
        required: Vec<usize>,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("occupation {n} in mode {mode} exceeds cutoff {cutoff}")]
    CutoffExceeded {
        mode: usize,
        n: usize,
        cutoff: usize,
    },

    #[error("invalid mode selection: {0}")]
    InvalidModes(String),

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("coefficients are not normalized (sum of squares {norm_sqr})")]
    Unnormalized { norm_sqr: f64 },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not diagonal in the number basis (off-diagonal {defect:.3e})")]
    NotDiagonal { defect: f64 },

    #[error("empty energy grid")]
    EmptyGrid,

    #[error("bound ordering violated: lower {lower_name} = {lower} exceeds upper {upper_name} = {upper}")]
    BoundOrdering {
        lower_name: String,
        lower: f64,
        upper_name: String,
        upper: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, Error>;
