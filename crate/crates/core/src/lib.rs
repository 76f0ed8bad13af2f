//! Contractive interpolants of commutant lifting data, parametrized through
//! Redheffer coefficient quadruples.
//!
//! All Hilbert spaces are finite dimensional; Hardy spaces enter only through
//! truncation at a polynomial degree `K`, where a vector of `H^2(U)` is the
//! stacked coefficient list `(u_0, u_1, .., u_K)` (degree-major layout).
//! Every analytic function is backed by a state-space realization, so
//! evaluation, Taylor expansion and truncated operators all come from the same
//! four matrices.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled.
//!
//! Module map:
//!
//! - [`opcore`]: complex operator algebra, contraction classes, defect
//!   operators, Douglas factorization and the Parrott co-isometric solve.
//! - [`systems`]: contractive linear systems, transfer and observability
//!   functions, truncated Hardy-space operators, observable reduction and
//!   unitary equivalence.
//! - [`redheffer`]: Redheffer coefficient quadruples, the linear fractional
//!   transform, coefficient matrices, Redheffer products, the rotated matrix
//!   `K_V`, uniqueness diagnostics, the harmonic maximum principle and the
//!   norm bounds.
//! - [`lifting`]: lifting data sets, the underlying contraction, the
//!   coefficient functions built from it, contractive interpolants and the
//!   inverse construction from coefficients back to a data set.
//! - [`random`]: seeded instance generators used by the tests and the CLI.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod lifting;
pub(crate) mod math;
pub mod opcore;
pub mod random;
pub mod redheffer;
pub mod report;
pub mod systems;

pub use error::{Error, Result};
pub use opcore::{
    classify, defect, douglas_solve, parrott_coisometry_solve, DefectData, OperatorClass,
    OperatorMatrix, ToleranceConfig, C64,
};
pub use report::{Check, CheckReport};
pub use systems::{HardyDomain, LinearSystem, TruncatedHardyOperator};

/// Default truncation degree for Hardy-space operators.
pub const DEFAULT_DEGREE: usize = 16;
