use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pencil is singular: no shift made the pencil invertible (best reciprocal condition {rcond:.3e}, needed > {threshold:.3e})")]
    SingularPencil { rcond: f64, threshold: f64 },

    #[error("spectral gap collapsed: margin {margin:.3e} <= tolerance {tolerance:.3e} ({context})")]
    GapCollapse {
        margin: f64,
        tolerance: f64,
        context: &'static str,
    },

    #[error("contour quadrature did not converge: idempotency residual {residual:.3e} > {tolerance:.3e} at {nodes} nodes")]
    QuadratureDivergence {
        residual: f64,
        tolerance: f64,
        nodes: usize,
    },

    #[error("Schur iteration on a {n}x{n} matrix did not converge after {attempts} attempts")]
    SchurNoConvergence { n: usize, attempts: usize },

    #[error("matrix is numerically singular: reciprocal condition {rcond:.3e} <= {threshold:.3e}")]
    SingularMatrix { rcond: f64, threshold: f64 },

    #[error("system is not hyperbolic at xi = {xi:?}: {reason} (margin {margin:.3e})")]
    NotHyperbolic {
        xi: Vec<f64>,
        reason: String,
        margin: f64,
    },

    #[error("system is not symmetric hyperbolic: {reason} (margin {margin:.3e})")]
    NotSymmetric { reason: String, margin: f64 },

    #[error("weight A^d V_s is degenerate: condition number {condition:.3e} > {limit:.3e}")]
    DegenerateWeight { condition: f64, limit: f64 },

    #[error("J = B Pi has deficient rank: sigma_min/sigma_max = {ratio:.3e} < {threshold:.3e} (Lopatinskii condition fails here)")]
    RankDeficientJ { ratio: f64, threshold: f64 },

    #[error("kernel inclusion N(A^d) in N(B) fails: |B w| = {residual:.3e} for witness {witness:?}")]
    KernelInclusionFailed { witness: Vec<[f64; 2]>, residual: f64 },

    #[error("power-law fit is unstable: r^2 = {r2:.4} < {threshold}")]
    FitUnstable { r2: f64, threshold: f64 },

    #[error("vector b must be nonzero")]
    ZeroVector,

    #[error("{failed} of {total} frequencies failed (limit {limit_fraction:.3}%): first failure at {first_frequency:?}: {first_error}")]
    SolverFailures {
        failed: usize,
        total: usize,
        limit_fraction: f64,
        first_frequency: Vec<f64>,
        first_error: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
