use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the physical or numerical domain of an operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A solver did not reach its tolerance before its iteration or size cap.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A requested size exceeds a memory or stability budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("no sign change of the curve difference on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("first-order splitting vanishes for N={n}, |l|={abs_l}")]
    NoFirstOrderSplitting { n: u32, abs_l: u32 },

    #[error("ground state is a tie at btilde={btilde} (margin {margin:e})")]
    GroundStateTie { btilde: f64, margin: f64 },

    #[error("spectrum has {got} entries, need at least {need}")]
    InsufficientSpectrum { got: usize, need: usize },

    /// The shifted operator is numerically singular at the requested shift.
    #[error("singular pivot at row {row} for shift {shift}")]
    SingularShift { row: usize, shift: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
