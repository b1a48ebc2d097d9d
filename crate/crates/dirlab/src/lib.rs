//! A desk-scale laboratory for multiplicative combinatorics in GF(p^n):
//! exact field arithmetic, product sets and doubling constants, direction
//! sets of point sets in the affine plane, linearized polynomials and
//! Frobenius monomials, and exhaustive searches over all functions whose
//! difference quotients land in a prescribed set.
//!
//! The crate is organized bottom-up:
//!
//! - [`field`] builds GF(p^n) deterministically and provides O(1) table
//!   arithmetic.
//! - [`sets`] implements multiplicative set algebra on subsets of the
//!   nonzero elements (product sets, inverse sets, the triple quotient
//!   `DD⁻¹D⁻¹`, doubling reports, coset detection).
//! - [`directions`] computes direction sets of point sets and function
//!   graphs in AG(2,q).
//! - [`linearized`] recognizes additive (linearized) functions and
//!   Frobenius monomials `a·x^{p^j}+b`, and carries the reciprocal
//!   transform and the associated polynomial identity check.
//! - [`search`] enumerates every function satisfying the quotient
//!   condition for a given set, and runs theorem-level verification
//!   sweeps and censuses.
//! - [`report`] and [`cli`] wrap everything in reproducible, canonically
//!   serialized reports and a command-line front end.
//!
//! See the `book/` guide for a narrative walk-through.

pub mod cli;
pub mod directions;
pub mod field;
pub mod linearized;
pub mod report;
pub mod search;
pub mod sets;

use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u32),
    #[error("modulus polynomial is reducible over F_p")]
    ReducibleModulus,
    #[error("modulus polynomial must be monic of degree n with coefficients in [0, p)")]
    DegreeMismatch,
    #[error("field size q = {0} exceeds the construction limit 2^20")]
    FieldTooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("Frobenius exponent j = {j} out of range [0, {n})")]
    JOutOfRange { j: u32, n: u32 },
    #[error("index {d} does not divide the group order {order}")]
    IndexDoesNotDivide { d: u32, order: u32 },
    #[error("operands belong to different field contexts")]
    ContextMismatch,
    #[error("operation requires a nonempty set")]
    EmptySet,
    #[error("element code {0} is not a valid member (zero or out of range)")]
    InvalidElement(u32),
    #[error("a point set needs at least two points for direction queries")]
    TooFewPoints,
    #[error("duplicate point in point set")]
    DuplicatePoint,
    #[error("function value at 0 must be 0 for image-ratio queries")]
    NonzeroAtOrigin,
    #[error("reciprocal transform needs f nonzero away from 0; f({0}) = 0")]
    ZeroValueAtNonzeroPoint(u32),
    #[error("field size q = {q} exceeds the exhaustion guard {limit}")]
    FieldTooLargeForExhaustion { q: u64, limit: u64 },
    #[error("report cannot be represented in the requested format: {0}")]
    UnrepresentableInFormat(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
