//! Analysis of constant-coefficient first-order hyperbolic boundary value
//! problems posed on a half-space.
//!
//! The crate covers the whole chain from the boundary matrix pencil to the
//! space-time solution:
//!
//! * [`algebra`]: eigenstructure of the pencil `(A^d, G)`, ordered Schur
//!   bases, contour-integral spectral projectors and the decaying propagator.
//! * [`hyperbolic`]: the system itself, the symbol `G`, hyperbolicity
//!   classification and the resolvent bound.
//! * [`lopatinskii`]: kernel inclusion, uniform and weighted Kreiss-Sakamoto
//!   ratios, and the empirical loss-of-derivatives power.
//! * [`halfspace`]: the explicit tangential-Fourier solver, weighted Sobolev
//!   norms and the a-priori estimate checks.
//! * [`models`]: wave/Neumann, oblique derivative, Maxwell and small
//!   positive-control presets together with their closed forms.
//! * [`io`]: the system-spec JSON format, the binary grid-field format and
//!   CSV emission.

pub mod algebra;
pub mod config;
pub mod error;
pub mod halfspace;
pub mod hyperbolic;
pub mod io;
pub mod linalg;
pub mod lopatinskii;
pub mod models;
pub mod parallel;
pub mod sampling;
pub mod verify;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
