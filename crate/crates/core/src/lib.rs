//! Robust monotone submodular maximization under element removals.
//!
//! A solution `A` of size `k` is scored by `g_tau(A)`, the worst value of
//! `f(A - Z)` over removals `Z ⊆ A` of at most `tau` elements. The crate
//! provides counted value oracles, generators for the pathological instances
//! that separate the algorithms, exact brute-force references, the
//! algorithms themselves, and a harness that runs them in bulk.

pub mod algorithms;
pub mod bruteforce;
pub mod constraints;
pub mod error;
pub mod format;
pub mod harness;
pub mod instances;
pub mod oracle;
pub mod subset;

pub use algorithms::{beta, RobustResult, TraceStep};
pub use bruteforce::Budget;
pub use error::{Error, Result};
pub use instances::{CopyMap, Instance};
pub use oracle::{Oracle, SetFunction, EPS};
pub use subset::{Element, Subset};
