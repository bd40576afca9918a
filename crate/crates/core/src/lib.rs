//! Negative-eigenvalue counting for two-dimensional Schrödinger operators.
//!
//! The crate covers three operators that all look like `R²` at large
//! scales: the discrete operator on the lattice `Z²`, the Kirchhoff
//! Laplacian on the chessboard metric graph, and the classical operator on
//! `R²`. Every discretization is reduced to a symmetric matrix whose inertia
//! gives the number of negative eigenvalues, and the eigenvalue-estimate
//! functionals (the logarithmically weighted lattice sum, the annuli
//! functional, the effective-potential functional and the graph functionals
//! `Λ`, `M`) are evaluated next to the counts so that each bound
//! can be checked against the count it claims to control.
//!
//! Sign convention: operators are `−Δ − αV` with `V ≥ 0`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod fem;
pub mod graph;
pub mod inertia;
pub mod lattice;
pub mod potential;
pub mod quad;
pub mod sturm;
pub mod workbench;

pub use bounds::BoundReport;
pub use error::{Error, Result};
pub use inertia::{count_below, ldlt_inertia, InertiaConfig, InertiaResult, SymSkylineMatrix};
pub use potential::{
    EdgeId, EdgePotentialField, EdgeProfile, EffectiveMode, EffectivePotential1D, LatticePotential, PlanePotential, RadialSplit,
};
