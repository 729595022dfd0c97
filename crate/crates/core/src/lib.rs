//! Exact arithmetic for formal Fourier expansions of holomorphic forms on
//! orthogonal groups of signature (2, m+2).
//!
//! The crate builds Maass lifts from seed data on the `b = 1` slice, applies
//! the coefficient-level dilation, slice and four-term symmetry operators,
//! and verifies — exactly on truncated supports, numerically on the tube
//! domain — that the divisor-sum space and the symmetry-defined space agree.
//!
//! All coefficient arithmetic is arbitrary-precision rational; floating point
//! appears only in [`analytic`], with tolerances derived from explicit tail
//! bounds. Every value is immutable after construction and every operation is
//! a pure function, so everything can be shared across threads freely.

pub mod analytic;
pub mod coeffs;
pub mod lattice;
pub mod maass;
pub mod restrict;
pub mod symmetry;

pub use coeffs::{CoeffError, CoeffFn, Prime, Region, Weight};
pub use lattice::{divisors, Index, LatticeError, QuadSpace, Rational};
pub use maass::{
    extract_seed, is_maass, maass_lift, MaassError, MaassReport, MaassViolation, SeedFn, SeedKey,
};
pub use restrict::{check_restriction, restrict_coeffs, Embedding, RestrictError};
pub use symmetry::{
    build_constraints, check_symmetry, compare_report, compare_with_maass, solve_null_space,
    ComparisonReport, ConstraintRow, ConstraintSystem, SolutionBasis, SymmetryReport,
};
