use thiserror::Error;

/// Errors raised by the geometry toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no candidate sphere satisfies the balance constraint")]
    NoBalancedCandidate,

    #[error("crossing budget exhausted at {budget} without a certified optimum")]
    BudgetExhausted { budget: usize },

    #[error("no cover of size at most {cap} exists for a cell of {cell_size} points")]
    CapExceeded { cap: usize, cell_size: usize },

    #[error("graph is disconnected: no path between {0} and {1}")]
    DisconnectedGraph(usize, usize),

    #[error("degenerate regression: {0}")]
    DegenerateFit(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used by the harness error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::OutOfRange(_) => "out_of_range",
            Error::InvalidInput(_) => "invalid_input",
            Error::NoBalancedCandidate => "no_balanced_candidate",
            Error::BudgetExhausted { .. } => "budget_exhausted",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::DisconnectedGraph(..) => "disconnected_graph",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
