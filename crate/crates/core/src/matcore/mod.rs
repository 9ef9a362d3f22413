//! Dense complex linear algebra shared by every other module.

mod bipartite;
mod conjugation;
mod eig;
mod matrix;

pub use bipartite::{
    bell_projector, partial_trace, partial_transpose, swap_operator, BipartiteOperator, Factor,
};
pub(crate) use bipartite::exact_sqrt;
pub use conjugation::{conjugate_in_basis, ConjugationSpec};
pub(crate) use eig::{basis_vector, complete_basis};
pub use eig::{
    check_hermitian, herm_eig, operator_norm, polar_unitary, psd_min_eig, pseudo_inv_sqrt,
    pseudo_sqrt, singular_values, svd_nonzero, top_singular_pair, trace_norm, SpectralDecomposition,
    HERMITIAN_TOL,
};
pub use matrix::{dot, kron, kron_vec, norm, normalize, CMatrix, C64};
pub(crate) use matrix::ZERO;
