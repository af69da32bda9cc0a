use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point lies outside the interval a function is defined on.
    Domain { value: f64, lo: f64, hi: f64 },
    /// An argument violates a precondition.
    Argument(&'static str),
    /// A closed-form denominator or normal-equation pivot vanished relative to
    /// the magnitude of its constituent terms.
    DegenerateOperator { magnitude: f64, scale: f64 },
    /// A linear system could not be solved.
    Singular { row: usize },
    /// The boundary-value problem has no unique solution.
    IllPosed(&'static str),
    /// A global matrix lost a structural property (e.g. positive definiteness).
    Assembly(&'static str),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateOperator { .. } | Error::Singular { .. } | Error::Assembly(_)
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { value, lo, hi } => {
                write!(f, "{value} lies outside the domain [{lo}, {hi}]")
            }
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DegenerateOperator { magnitude, scale } => write!(
                f,
                "degenerate operator: magnitude {magnitude:e} is negligible against term scale {scale:e}"
            ),
            Error::Singular { row } => write!(f, "singular matrix (zero pivot in row {row})"),
            Error::IllPosed(msg) => write!(f, "ill-posed problem: {msg}"),
            Error::Assembly(msg) => write!(f, "assembly error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
