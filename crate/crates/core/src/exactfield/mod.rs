//! Exact arithmetic: sparse polynomials over Q and rational functions whose
//! denominators are kept as products of integer linear forms.

mod equality;
mod gcd;
mod linear;
pub mod modp;
mod monomial;
mod poly;
mod rational;
mod registry;
mod text;

use thiserror::Error;

pub use equality::{failure_bound, rf_equal, sample_avoiding, CheckMode, EqualityCertificate, MAX_RESAMPLES};
pub use gcd::gcd;
pub use linear::LinearForm;
pub use monomial::Monomial;
pub use poly::{q_frac, q_int, Polynomial, Q};
pub use rational::RationalFunction;
pub use registry::{RegistryBuilder, VarKind, Variable, VariableRegistry, MAX_VARIABLES};
pub use text::{parse_polynomial, parse_rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("operands use different variable registries")]
    RegistryMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole: {0} vanishes")]
    Pole(String),
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
    #[error("invalid variable name {0:?}")]
    BadVariableName(String),
    #[error("{0} variables exceed the limit of {MAX_VARIABLES}")]
    TooManyVariables(usize),
    #[error("exponent exceeds 255")]
    ExponentOverflow,
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("shift vector has length {got}, expected {expected}")]
    ShiftLength { got: usize, expected: usize },
    #[error("denominators vanished at {MAX_RESAMPLES} consecutive samples")]
    ResampleExhausted,
    #[error("evaluation point has length {got}, expected {expected}")]
    PointLength { got: usize, expected: usize },
}
