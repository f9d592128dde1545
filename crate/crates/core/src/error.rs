use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no admissible d_n: {0}")]
    NoAdmissibleGap(String),

    #[error("m_n = 0: d_n = {d} is below the nearest support gap {gap} at index {index}")]
    ZeroPuncturedMass { index: usize, d: f64, gap: f64 },

    #[error("region carries zero mass")]
    ZeroMass,

    #[error("unresolved tail: mass in region is only known to lie in [{lo}, {hi}]")]
    UnresolvedTail { lo: f64, hi: f64 },

    #[error("unsupported restriction: {0}")]
    UnsupportedRestriction(String),

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("singular triangular factor: |T[{index},{index}]| = {value:e}")]
    Singular { index: usize, value: f64 },

    #[error("non-unique solution: spectra overlap within {gap:e}")]
    SpectraOverlap { gap: f64 },

    #[error("rank deficient input at column {0}")]
    RankDeficient(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate block: {0}")]
    DegenerateBlock(String),

    #[error("matrix is not supported on the top-right block (entry ({row},{col}) is nonzero)")]
    NotTopRightBlock { row: usize, col: usize },

    #[error("subsequence selection failed: {0}")]
    Selection(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
