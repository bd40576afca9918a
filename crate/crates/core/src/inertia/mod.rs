//! Eigenvalue counting through the inertia of symmetric matrices.
//!
//! Every discretized Hamiltonian in the crate ends up as a
//! [`SymSkylineMatrix`]. By Sylvester's law of inertia the signs of the
//! pivots of `A − σI = LDLᵀ` count the eigenvalues of `A` below, at and
//! above `σ`; no eigenvalue is ever computed.

mod ldlt;
mod market;
mod rcm;
mod skyline;
mod sparse;

pub use ldlt::{count_below, ldlt_inertia, ldlt_inertia_with, InertiaConfig, InertiaResult};
pub use market::write_matrix_market;
pub use rcm::{envelope_profile, rcm_order, EnvelopeProfile, Ordering};
pub use skyline::SymSkylineMatrix;
pub use sparse::SymSparse;
