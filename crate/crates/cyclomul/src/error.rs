//! Error type shared by every module in the crate.
//!
//! Variants are coarse on purpose: callers match on the failure class
//! (width, mismatch, search exhaustion, violated precondition) and the
//! message carries the specifics.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Error)]
pub enum Error {
    /// An input exceeds the width a routine is specified for.
    #[error("unsupported width: {0}")]
    UnsupportedWidth(String),

    /// Two operands that must agree (modulus, ring, length) do not.
    #[error("operand mismatch: {0}")]
    Mismatch(String),

    /// Division by zero, inversion of a non-unit, or a zero operand
    /// where a unit is required.
    #[error("not invertible: {0}")]
    NotInvertible(String),

    /// Moduli that must be pairwise coprime are not.
    #[error("moduli not coprime: {0}")]
    NotCoprime(String),

    /// A bounded search ended without a hit.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// A named precondition or profile bound does not hold.
    #[error("bound violated: {0}")]
    BoundViolated(String),

    /// A sieve or table would exceed its memory budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// Text input (hex string, polynomial line, key=value override)
    /// failed to parse.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
