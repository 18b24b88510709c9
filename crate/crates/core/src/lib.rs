//! Reductions between valued constraint satisfaction problems and the
//! minimum-cost homomorphism problem for a fixed balanced digraph.
//!
//! A weighted relation `ρ` is encoded as a leveled digraph `𝔇` together with a
//! unary cost `u` ([`encoding`]). Instances are moved in both directions by
//! [`reduce::forward_reduce`] and [`reduce::backward_reduce`], and every step
//! can be certified against the exhaustive solvers in [`oracle`].
//! [`algebra`] extends polymorphisms and weighted polymorphisms of `ρ` to `𝔇`.

pub mod algebra;
pub mod cost;
pub mod digraph;
pub mod encoding;
pub mod gen;
pub mod harness;
pub mod io;
pub mod oracle;
pub mod reduce;
pub mod structure;

pub use cost::{ExtCost, Rational};
pub use digraph::{Digraph, LeveledDigraph};
pub use encoding::{build_encoding, EncodedDigraph};
pub use structure::{Assignment, Constraint, VcspInstance, WeightedRelation, WeightedStructure};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    /// Malformed input, distinct from an infinite cost.
    #[error("structural error: {0}")]
    Structure(String),
    #[error("digraph is not balanced; witness walk {witness:?}")]
    NotBalanced { witness: Vec<String> },
    #[error("search budget of {limit} nodes exceeded")]
    BudgetExceeded { limit: u64 },
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("component is not satisfiable in any Q_S")]
    NotSatisfiableAnywhere,
    #[error("minimal path set is not unique: {0}")]
    MonotonicityViolation(String),
    #[error("fan solver precondition: {0}")]
    FanPrecondition(String),
    #[error("encoding invariant violated: {0}")]
    EncodingViolation(String),
    #[error("rigidity differs between structure ({structure}) and digraph ({digraph})")]
    BiconditionalViolation { structure: bool, digraph: bool },
    #[error("vertex order is not total: {0}")]
    TotalityViolation(String),
    #[error("component lemma failed: {0}")]
    LemmaCheckFailed(String),
    #[error("extended operation is not a polymorphism: {0}")]
    PolymorphismCheckFailed(String),
    #[error("extended operation leaks into R: {0}")]
    RangeLeakIntoR(String),
    #[error("weighted polymorphism transfer failed: {0}")]
    TransferVerificationFailed(String),
    #[error("equivalence violated: {0}")]
    EquivalenceViolation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
