use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Shapes or algebras of the operands do not match.
    #[error("structural error: {0}")]
    Structural(String),
    /// An input lies outside the domain of the operation (not self-adjoint,
    /// not positive, not a projection, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical repair or decomposition failed beyond its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A mathematical precondition of the operation is not met.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Word enumeration would exceed the configured budget.
    #[error("budget exceeded: {needed} words requested, budget is {budget}")]
    Budget { needed: u128, budget: usize },
    /// Forbidden operation on extended reals (e.g. `inf * 0`).
    #[error("extended arithmetic: {0}")]
    ExtendedArithmetic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
