use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("unknown group label `{0}`")]
    UnknownGroup(String),

    #[error("degenerate group `{label}`: {members} members, {complement} in complement")]
    DegenerateGroup {
        label: String,
        members: usize,
        complement: usize,
    },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("infeasible constraint: {0}")]
    InfeasibleConstraint(String),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("estimator `{estimator}`: {source}")]
    Estimator {
        estimator: String,
        #[source]
        source: Box<Error>,
    },

    #[error("cross-validation fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("pair count {pairs} exceeds cap {cap}; use seeded pair subsampling")]
    PairCapExceeded { pairs: u128, cap: u128 },

    #[error("config error: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Attach estimator context to an error bubbling out of a fit.
    pub fn in_estimator(self, estimator: &str) -> Self {
        Error::Estimator {
            estimator: estimator.to_string(),
            source: Box::new(self),
        }
    }

    /// Process exit code convention: 1 for configuration/schema problems,
    /// 2 for runtime and solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_)
            | Error::Parse { .. }
            | Error::EmptyDataset(_)
            | Error::UnknownGroup(_)
            | Error::InvalidHyperparameter(_)
            | Error::Config(_) => 1,
            Error::Estimator { source, .. } => source.exit_code().max(2),
            _ => 2,
        }
    }
}
