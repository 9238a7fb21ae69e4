//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors shared by the solver modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input failed validation; the message names the offending field.
    Validation(String),
    /// A nonlinearity was evaluated outside its domain.
    Domain(String),
    /// Adaptive integration drove the step size below the representable
    /// minimum, typically a stiff or singular field profile.
    StepSizeUnderflow { x: f64 },
    /// Adaptive integration ran out of its step budget.
    MaxStepsExceeded { x: f64 },
    /// A scattering denominator vanished: the configuration sits on a
    /// spectral singularity and the reflection/transmission amplitudes
    /// diverge.
    SingularDenominator { defect: f64 },
    /// Composition requires the first factor's support to lie entirely to
    /// the left of the second's.
    SupportOverlap { left_end: f64, right_start: f64 },
    /// An equation produced a different number of admissible roots than it
    /// guarantees.
    RootMultiplicity { count: usize },
    /// Damped fixed-point iteration for left incidence did not converge.
    FixedPointDiverged { iterations: usize },
    /// No residual sample inside the scan window could be evaluated.
    NoValidSamples,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::StepSizeUnderflow { x } => {
                write!(f, "step size underflow during integration at x = {x}")
            }
            Error::MaxStepsExceeded { x } => {
                write!(f, "integration exceeded its step budget at x = {x}")
            }
            Error::SingularDenominator { defect } => write!(
                f,
                "singular scattering denominator (defect {defect:.3e}): spectral singularity"
            ),
            Error::SupportOverlap {
                left_end,
                right_start,
            } => write!(
                f,
                "supports overlap: first factor ends at {left_end} but second starts at {right_start}"
            ),
            Error::RootMultiplicity { count } => {
                write!(f, "expected exactly one admissible root, found {count}")
            }
            Error::FixedPointDiverged { iterations } => {
                write!(f, "fixed-point iteration did not converge in {iterations} iterations")
            }
            Error::NoValidSamples => write!(f, "no residual sample in the scan window was evaluable"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
