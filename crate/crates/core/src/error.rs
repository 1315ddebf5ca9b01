use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one class of
/// caller mistake; the CLI turns all of them into exit status 1.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An argument lies outside the domain of a function (nonpositive Beta
    /// argument, weight exponent s <= -1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested object would be too large to build (e.g. a resolution
    /// level with more summands than can be listed).
    #[error("too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
