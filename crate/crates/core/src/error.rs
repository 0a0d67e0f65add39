use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A value was requested outside the domain of a function family.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument violated a precondition.
    #[error("argument error: {0}")]
    Argument(String),

    /// A computation produced a non-finite or otherwise unusable value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// The grid cannot resolve the requested kernel family.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Wrap-around mass on the periodic grid exceeds the trust threshold.
    #[error(
        "periodization error: wrap-around estimate {estimate:.3e} exceeds {limit:.3e} at k = {k}"
    )]
    Periodization { k: usize, estimate: f64, limit: f64 },

    /// The requested computation is too expensive for this code path.
    #[error("cost error: {0}")]
    Cost(String),

    /// Two grid-based objects do not share the same grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Input data is unusable (non-positive norms, empty tables, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A least-squares fit could not be carried out.
    #[error("fit error: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
