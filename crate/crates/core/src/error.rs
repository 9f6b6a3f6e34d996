use alloc::string::String;

/// Errors produced by the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violated a shape, range or length precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An operation was called in the wrong state, e.g. backward before forward.
    #[error("invalid state: {0}")]
    State(&'static str),
    /// Training produced a non-finite loss.
    #[error("numeric divergence at epoch {epoch}, batch {batch}")]
    NumericDivergence { epoch: usize, batch: usize },
    /// The bytes are not a model file.
    #[error("not a model file: bad magic")]
    Format,
    /// The model file was written by a newer format version.
    #[error("unsupported model format version {found} (this build reads up to {supported})")]
    Version { found: u16, supported: u16 },
    /// The model file is truncated or fails its checksum.
    #[error("corrupt model file: {0}")]
    Corrupt(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
