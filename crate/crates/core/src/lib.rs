//! Symbolic-numeric workbench for linear evolution equations
//! `u_t = A(x,t) u_xx + B(x,t) u_x + C(x,t) u`.
//!
//! - [`expr`]: expression trees, parsing, differentiation, simplification.
//! - [`sampling`]: seeded quasi-random zero tests.
//! - [`symmetry`]: second prolongation and determining equations.
//! - [`reduction`]: group invariants and similarity reduction to ODEs.
//! - [`synth`]: coefficient families admitting prescribed reductions or symmetries.
//! - [`numverify`]: finite differences, convergence studies, vertical-mode eigenproblem.

pub mod expr;
pub mod numverify;
pub mod reduction;
pub mod report;
pub mod sampling;
pub mod symmetry;
pub mod synth;
