//! Explicit Fourier-Laplace solution of the half-space problem, weighted
//! Sobolev norms and numerical checks of the a-priori estimates.

mod fft;
mod frequency;
mod norms;
mod spacetime;

pub use fft::{fft_axes, frequency_index, Lattice};
pub use frequency::{
    manufactured_frequency_problem, solve_frequency, solve_u1, solve_u2, Extension, FrequencyContext,
    FrequencyProblem, FrequencySolution, SolverOptions, XGrid,
};
pub use norms::{
    weighted_estimate_spectral, sobolev_boundary, sobolev_interior, verify_weighted_estimate, verify_energy_bound, EstimateMode,
    EstimateRatio, EnergyBoundRatios, SobolevParams, SpectralDatum,
};
pub use spacetime::{
    manufactured_spacetime, solve, HalfspaceSolution, Manufactured, Pulse, SolveDiagnostics, SpaceTimeGrid,
};
