//! Generalized eigenstructure of the boundary pencil `(A^d, G)`.
//!
//! Solutions `e^{lambda x} z` of `A^d U' = G U` correspond to eigenpairs
//! `lambda A^d z = G z`. Two independent routes to the stable subspace are
//! provided: an ordered Schur factorization ([`pencil_eigen`]) and the
//! contour integral `(1/2 pi i) oint (zeta A^d - G)^{-1} A^d d zeta`
//! ([`spectral_projector`]).

mod contour;
mod pencil;
mod schur;

pub use contour::{
    contour_from_spectrum, propagator, resolvent_norm, spectral_projector, Contour,
    SpectralProjection,
};
pub use pencil::{pencil_eigen, EigenClass, Eigenpair, Eigenvalue, PencilDecomposition};
pub use schur::{ordered_schur, OrderedSchur};
