use core::fmt;

/// Why a distribution failed validation. Each variant has a stable code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamError {
    NonFinite { name: &'static str },
    NegativeSupport { name: &'static str, value: f64 },
    NonPositiveShape(f64),
    NonPositiveRate(f64),
    NonPositiveScale(f64),
    EmptyInterval { a: f64, b: f64 },
    NoAtoms,
    NonPositiveWeight(f64),
    WeightSum(f64),
}

impl ParamError {
    pub fn code(&self) -> &'static str {
        match self {
            ParamError::NonFinite { .. } => "E_NONFINITE",
            ParamError::NegativeSupport { .. } => "E_NEGATIVE_SUPPORT",
            ParamError::NonPositiveShape(_) => "E_SHAPE",
            ParamError::NonPositiveRate(_) => "E_RATE",
            ParamError::NonPositiveScale(_) => "E_SCALE",
            ParamError::EmptyInterval { .. } => "E_INTERVAL",
            ParamError::NoAtoms => "E_NO_ATOMS",
            ParamError::NonPositiveWeight(_) => "E_WEIGHT",
            ParamError::WeightSum(_) => "E_WEIGHT_SUM",
        }
    }
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::NonFinite { name } => write!(f, "parameter `{name}` is not finite"),
            ParamError::NegativeSupport { name, value } => {
                write!(f, "`{name}` = {value} lies outside [0, inf)")
            }
            ParamError::NonPositiveShape(k) => write!(f, "shape k = {k} must be > 0"),
            ParamError::NonPositiveRate(l) => write!(f, "rate lambda = {l} must be > 0"),
            ParamError::NonPositiveScale(s) => write!(f, "sigma = {s} must be > 0"),
            ParamError::EmptyInterval { a, b } => write!(f, "b ≤ a (a = {a}, b = {b})"),
            ParamError::NoAtoms => write!(f, "atom list is empty"),
            ParamError::NonPositiveWeight(w) => write!(f, "atom weight {w} must be > 0"),
            ParamError::WeightSum(s) => write!(f, "atom weights sum to {s}, expected 1"),
        }
    }
}

impl core::error::Error for ParamError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Distribution parameters violate the family's invariants.
    Param(ParamError),
    /// A scalar argument is outside the operation's domain.
    Domain { what: &'static str, value: f64 },
    /// An operation was called without its precondition holding.
    Precondition(&'static str),
    /// The feasibility predicate agrees at both ends of a bisection bracket.
    Bracket { lo: f64, hi: f64, feasible: bool },
    /// Bisection found feasibility that is not monotone in the scanned parameter.
    NonMonotone { at: f64, expected_feasible: bool },
}

impl From<ParamError> for Error {
    fn from(e: ParamError) -> Self {
        Error::Param(e)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Param(e) => write!(f, "invalid distribution [{}]: {e}", e.code()),
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::Precondition(msg) => write!(f, "precondition failed: {msg}"),
            Error::Bracket { lo, hi, feasible } => write!(
                f,
                "no sign change on [{lo}, {hi}]: both ends are {}",
                if *feasible { "feasible" } else { "infeasible" }
            ),
            Error::NonMonotone { at, expected_feasible } => write!(
                f,
                "feasibility is not monotone: parameter {at} expected {}",
                if *expected_feasible { "feasible" } else { "infeasible" }
            ),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::Param(e) => Some(e),
            _ => None,
        }
    }
}
