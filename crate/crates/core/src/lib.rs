//! Finite-dimensional noncommutative `L^p` spaces.
//!
//! Algebras are finite direct sums `⊕_j L^∞(Ω_j; M_{n_j})` with weighted matrix
//! traces. On top of that the crate computes Schatten/`L^p` norms, the
//! `S¹`-valued factorization norm of `[x_ij]`, estimates of completely bounded
//! and `S¹`-bounded norms of maps, and the Yeadon factorization `T = wBJ` of
//! separating maps together with the direct/anti-direct split of `J`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod algebra;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod map;
pub mod random;
pub mod separating;
pub mod suite;
pub mod valued;

pub use algebra::{
    embed_matrix_block, make_algebra, minimal_central_projections, subhomogeneous_degree, AlgebraSpec, Block,
    Element, ProjectionList, Slot,
};
pub use error::{Error, Result};
pub use lp::{amplified_norm, check_optr_cb, lp_norm, polar, spectral_projection, AmplifiedElement, Exponent};
pub use map::LinearMap;

/// Default numerical tolerances.
pub mod tol {
    /// Algebraic identities on unit-scale inputs.
    pub const ALG: f64 = 1e-9;
    /// Relative agreement of computed norms.
    pub const NORM: f64 = 1e-8;
    /// Reconstruction error of a factorization `x_ij = Σ a_ik b_kj`.
    pub const FACT: f64 = 1e-8;
    /// Disjointness of images in the separating test, before scaling.
    pub const SEP: f64 = 1e-8;
    /// Eigenvalues and singular values below this fraction of the largest are zero.
    pub const SUPPORT_CUT: f64 = 1e-10;
    /// Eigenvalues closer than this (relative) are clustered.
    pub const EIG_GAP: f64 = 1e-10;
}
