//! Positive maps on matrix algebras and their tensor-product picture.
//!
//! The crate covers the Choi correspondence between linear maps
//! `M_n -> M_m` and bipartite operators, classifiers for the positivity
//! hierarchy (block-positive, k-positive, CP, co-CP, decomposable),
//! certified interval estimates for the projective, injective and dual
//! tensor norms, the entanglement-mapping construction for bipartite
//! states with its PPT test, and Radon-Nikodym derivatives between
//! dominated CP maps.
//!
//! Bipartite index convention: basis vector `(i, j)` of `C^d1 (x) C^d2`
//! has flat index `i * d2 + j` (first factor is the slow index).

pub mod cli;
pub mod entangle;
pub mod error;
pub mod io;
pub mod matcore;
pub mod positivity;
pub mod qmaps;
pub mod random;
pub mod rn;
pub mod tensornorms;
pub mod verdict;

pub use error::{Error, Result};
pub use matcore::{BipartiteOperator, CMatrix, ConjugationSpec, Factor, SpectralDecomposition, C64};
pub use qmaps::{QMap, TensorElement};
