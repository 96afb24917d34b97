//! Rank-restricted matrix norms and the coupling machinery built on top of them.
//!
//! The crate revolves around three layers:
//!
//! * [`matrix`], [`svd`], [`random`]: small dense linear algebra: a row-major
//!   `f64` matrix type, a one-sided Jacobi SVD tuned for the small dimensions
//!   this crate targets, and seeded generators for orthogonal and planted-rank
//!   matrices.
//! * [`vector_norms`], [`matrix_norms`]: symmetric gauges on coordinate
//!   vectors and the rank-indexed norm families they induce on matrices:
//!   for a source norm `‖·‖` the dual r-rank norm is the support function of
//!   the intersection of the unit ball with the rank-`r` variety, and the
//!   r-rank norm is its dual. Closed forms are used where they exist;
//!   everything else goes through seeded ascent estimators.
//! * [`capra`], [`oracle`]: the coupling `c(M, N) = ⟨M, N⟩ / ‖M‖`, conjugacy
//!   of `φ ∘ rank` with respect to it, and the lower/upper variational
//!   estimates that sandwich the rank of a matrix.
//!
//! [`checks`] bundles the acceptance sweep: every documented guarantee is
//! re-verified numerically with pinned tolerances and seeds, and the `verify`
//! subcommand of the CLI (and the `acceptance` integration test) report one
//! pass/fail line per criterion.

pub mod capra;
pub mod checks;
pub mod error;
pub mod ext;
pub mod io;
pub mod matrix;
pub mod matrix_norms;
pub mod oracle;
pub mod par;
pub mod random;
pub mod svd;
pub mod vector_norms;

pub use error::{Error, Result};
pub use matrix::{trace_inner, Matrix};
pub use random::{random_orthogonal, random_rank_r, Seed};
pub use svd::{numerical_rank, singular_values, svd, SingularValues, SvdFactors};
