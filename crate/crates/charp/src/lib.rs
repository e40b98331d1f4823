//! Exact homological algebra in characteristic `p`.
//!
//! The crate is organised bottom-up:
//!
//! * [`ralg`]: coefficient rings (prime fields, Galois fields, `Z/p^e`, Galois
//!   rings, length-2 Witt vectors) and dense/sparse linear algebra over them.
//! * [`cx`]: bounded cochain complexes, cohomology, cones, truncations and
//!   connecting homomorphisms.
//! * [`dk`]: the Dold–Kan correspondence and derived symmetric, divided and
//!   exterior powers together with their natural transformations.
//! * [`csa`]: cosimplicial commutative algebras, nerve cochain algebras,
//!   Frobenius and the Steenrod operations `P^0`, `P^1`.
//! * [`gcoh`]: cohomology of finite groups and lattices, invariant cochains for
//!   semidirect products, extension classes and Bocksteins.
//! * [`roots`]: certified enumeration of weight congruences and the quadratic
//!   field search.
//! * [`verify`]: the scenario registry, reports and budgets used by the `charp`
//!   command line tool.

pub mod csa;
pub mod cx;
pub mod dk;
pub mod gcoh;
pub mod ralg;
pub mod roots;
pub mod verify;

/// Engine version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Errors produced anywhere in the engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid ring specification: {0}")]
    InvalidSpec(String),
    #[error("modulus {0} is reducible")]
    ReducibleModulus(String),
    #[error("element {0} is not invertible")]
    NotInvertible(String),
    #[error("operation requires a field, got {0}")]
    NotAField(String),
    #[error("operation requires a local ring with maximal ideal (p), got {0}")]
    NotLocal(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degree {degree} outside the range [{lo}, {hi}]")]
    DegreeOutOfRange { degree: i64, lo: i64, hi: i64 },
    #[error("not a complex: {0}")]
    NotAComplex(String),
    #[error("sequence is not exact: {0}")]
    NotExact(String),
    #[error("non-free module: {0}")]
    NonFree(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
