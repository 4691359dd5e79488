/// Numerical thresholds shared by every module.
///
/// Error messages report the margin that violated one of these values.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// `(alpha, beta)` is an infinite eigenvalue when `|beta| <= infinite * (|alpha| + |beta|)`.
    pub infinite: f64,
    /// Finite eigenvalues with `|Re lambda| <= imaginary_axis * max(1, |lambda|)` trigger `GapCollapse`.
    pub imaginary_axis: f64,
    /// Relative clustering distance used for multiplicity counts of pencil eigenvalues.
    pub cluster: f64,
    /// Target idempotency residual of the spectral projector.
    pub projector: f64,
    /// Initial trapezoidal node count on the contour.
    pub initial_nodes: usize,
    /// Largest node count before `QuadratureDivergence`.
    pub max_nodes: usize,
    /// Minimum spectral gap for building a contour.
    pub gap: f64,
    /// Relative singular value threshold for rank and null space decisions.
    pub rank: f64,
    /// Reciprocal condition threshold for inverting matrices.
    pub singular: f64,
    /// Realness tolerance for characteristic roots, relative to the matrix scale.
    pub root_imag: f64,
    /// Relative clustering distance for characteristic roots.
    pub root_cluster: f64,
    /// Condition number limit of `A^d V_s` in the weighted Kreiss-Sakamoto ratio.
    pub weight_condition: f64,
    /// `sigma_min(J) / sigma_max(J)` below this is a Lopatinskii failure.
    pub j_rank: f64,
    /// Uniform Kreiss-Sakamoto threshold on the infimum ratio.
    pub uniform_ks: f64,
    /// Smallest `gamma` accepted by the space-time solver.
    pub gamma_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            infinite: 1e-10,
            imaginary_axis: 1e-10,
            cluster: 1e-8,
            projector: 1e-10,
            initial_nodes: 64,
            max_nodes: 4096,
            gap: 1e-12,
            rank: 1e-10,
            singular: 1e-14,
            root_imag: 1e-8,
            root_cluster: 1e-6,
            weight_condition: 1e12,
            j_rank: 1e-12,
            uniform_ks: 1e-3,
            gamma_floor: 1.0,
        }
    }
}
