//! Dense complex linear algebra for small bipartite systems.

mod eig;
mod hw;
mod matrix;
mod ops;
mod schmidt;
mod svd;

pub use eig::{
    canonical_span_basis, complete_basis, hermitian_eig, unitary_eig, HermEig, DEGENERACY_GAP,
    MAX_SWEEPS, OFF_DIAGONAL_TOL,
};
pub use hw::{
    clock, hermiticity_residual, hw_adjoint_partner, hw_basis, hw_element, hw_expand,
    hw_reconstruct, label_order, omega, shift, HwCoefficients,
};
pub use matrix::{fix_phase, inner, kron_vec, normalize, vec_norm, CMatrix, C64, ONE, ZERO};
pub use ops::{
    invert_permutation, kron, kron_all, local, partial_trace, partial_transpose,
    permute_subsystems, realign, Subsystem,
};
pub use schmidt::{operator_schmidt, schmidt, OperatorSchmidt, SchmidtResult, OPERATOR_RANK_TOL};
pub use svd::{svd, Svd};
