use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument does not hold.
    InvalidArgument(String),
    /// An index or abscissa lies outside the coefficient table.
    OutOfRange { requested: f64, n_max: usize },
    /// Exact coefficient arithmetic left the 128-bit range.
    Overflow { degree: usize },
    /// Adaptive quadrature needed more panels than allowed.
    ResourceLimit { what: String, panels: usize, cap: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::OutOfRange { requested, n_max } => {
                write!(f, "{requested} is outside the coefficient table (n_max = {n_max})")
            }
            Error::Overflow { degree } => {
                write!(f, "128-bit overflow while expanding the eta product at degree {degree}")
            }
            Error::ResourceLimit { what, panels, cap } => {
                write!(f, "{what}: needs more than {cap} quadrature panels (reached {panels})")
            }
        }
    }
}

impl core::error::Error for Error {}
