//! Uniqueness certificates for sparse solutions of underdetermined systems.
//!
//! Given a measurement matrix `A`, the crate computes sparsity levels `K`
//! below which every `K`-sparse solution of `y = A x` is unique, using four
//! coherence-type rules (see [`bounds`]). The [`oracle`] module checks those
//! certificates by brute force on small instances, and [`recon`] runs
//! least-squares and OMP reconstruction experiments.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod format;
pub mod gram;
pub mod matgen;
pub mod matrix;
pub mod oracle;
pub mod recon;

pub use bounds::{
    alpha_bound, bound_report, classical_bound, gershgorin_bound, two_row_bound, BoundKind, BoundRegistry,
    BoundReport, SparsityBound, UniquenessBound,
};
pub use error::{Error, Result};
pub use gram::{gram_matrix, GramProfile};
pub use matgen::{FamilyRegistry, GeneratorSpec, MatrixFamily};
pub use matrix::{normalize_columns, Field, MeasurementMatrix, C64};
pub use oracle::{check_uniqueness_bruteforce, OracleConfig, OracleVerdict};
pub use recon::{least_squares_on_support, measure, omp, ReconResult, SparseVector};
