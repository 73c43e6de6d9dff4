//! Dense complex matrices, tensor structure and tolerance-aware spectral
//! calculus.

mod matrix;
mod spectral;

pub use matrix::{direct_sum, hs_inner, kron, partial_trace, pauli, ComplexMatrix, Subsystem, C64, I, ONE, ZERO};
pub(crate) use matrix::hs_inner_unchecked;
pub use spectral::{
    complete_to_unitary, eigh, extend_orthonormal, is_positive, lagrange_projectors, matrix_sqrt, null_space,
    numerical_rank, orthonormalize_span, projector_basis, pseudo_inverse, range_projector, span_residual,
    spectral_decomposition, Eigh, Positivity, SpectralDecomposition, Tolerances,
};
