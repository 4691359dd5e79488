//! Boundary operators and the (weakened) uniform Lopatinskii conditions.

use std::fmt;
use std::sync::Arc;

use crate::algebra::pencil_eigen;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hyperbolic::{build_g, reference_frequency, Frequency, HyperbolicSystem};
use crate::linalg::{self, CMat, CVec};
use crate::parallel;
use crate::sampling;

/// A boundary operator whose matrix depends on the frequency, such as the
/// first-order reduction of an oblique derivative condition.
///
/// Implementations must be homogeneous of degree zero.
pub trait BoundarySymbol: Send + Sync {
    fn tag(&self) -> &str;
    fn mu(&self) -> usize;
    fn n(&self) -> usize;
    fn matrix(&self, freq: &Frequency) -> CMat;
    /// Parameters that rebuild the symbol through its tag.
    fn params(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Clone)]
pub enum BoundaryOperator {
    Constant(CMat),
    Symbol(Arc<dyn BoundarySymbol>),
}

impl fmt::Debug for BoundaryOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryOperator::Constant(b) => f.debug_tuple("Constant").field(&b.shape()).finish(),
            BoundaryOperator::Symbol(s) => f.debug_tuple("Symbol").field(&s.tag()).finish(),
        }
    }
}

impl BoundaryOperator {
    /// Constant `mu x N` operator; rejects rank-deficient or non-finite input.
    pub fn constant(b: CMat, tol: &Tolerances) -> Result<Self> {
        if b.nrows() == 0 || b.ncols() == 0 {
            return Err(Error::InvalidInput("boundary operator must be non-empty".into()));
        }
        if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("boundary operator has non-finite entries".into()));
        }
        let rank = linalg::numerical_rank(&b, tol.rank);
        if rank != b.nrows() {
            return Err(Error::InvalidInput(format!(
                "boundary operator has rank {rank} but {} rows",
                b.nrows()
            )));
        }
        Ok(BoundaryOperator::Constant(b))
    }

    pub fn mu(&self) -> usize {
        match self {
            BoundaryOperator::Constant(b) => b.nrows(),
            BoundaryOperator::Symbol(s) => s.mu(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            BoundaryOperator::Constant(b) => b.ncols(),
            BoundaryOperator::Symbol(s) => s.n(),
        }
    }

    pub fn matrix_at(&self, freq: &Frequency) -> CMat {
        match self {
            BoundaryOperator::Constant(b) => b.clone(),
            BoundaryOperator::Symbol(s) => s.matrix(&freq.normalized()),
        }
    }

    pub fn as_constant(&self) -> Option<&CMat> {
        match self {
            BoundaryOperator::Constant(b) => Some(b),
            BoundaryOperator::Symbol(_) => None,
        }
    }

    pub fn tag(&self) -> Option<&str> {
        match self {
            BoundaryOperator::Constant(_) => None,
            BoundaryOperator::Symbol(s) => Some(s.tag()),
        }
    }

    /// Parameters of a registered boundary symbol; empty for matrices.
    pub fn params(&self) -> Vec<f64> {
        match self {
            BoundaryOperator::Constant(_) => Vec::new(),
            BoundaryOperator::Symbol(s) => s.params(),
        }
    }

    /// Row scaling `c B`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            BoundaryOperator::Constant(b) => BoundaryOperator::Constant(b * linalg::re(c)),
            BoundaryOperator::Symbol(s) => BoundaryOperator::Symbol(Arc::new(Scaled { inner: s.clone(), c })),
        }
    }
}

struct Scaled {
    inner: Arc<dyn BoundarySymbol>,
    c: f64,
}

impl BoundarySymbol for Scaled {
    fn tag(&self) -> &str {
        self.inner.tag()
    }
    fn mu(&self) -> usize {
        self.inner.mu()
    }
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn params(&self) -> Vec<f64> {
        self.inner.params()
    }
    fn matrix(&self, freq: &Frequency) -> CMat {
        self.inner.matrix(freq) * linalg::re(self.c)
    }
}

/// Largest `|B v|` over an orthonormal basis of `N(A^d)` together with the
/// maximizing kernel vector.
pub fn kernel_inclusion_witness(b: &CMat, ad: &CMat, tol: &Tolerances) -> (f64, Option<CVec>) {
    let kernel = linalg::null_space(ad, tol.rank);
    let scale = linalg::spectral_norm(b).max(f64::MIN_POSITIVE);
    let mut worst = 0.0;
    let mut witness = None;
    for j in 0..kernel.ncols() {
        let v = kernel.column(j).into_owned();
        let r = (b * &v).norm() / scale;
        if r > worst {
            worst = r;
            witness = Some(v);
        }
    }
    (worst, witness)
}

/// `N(A^d) subset N(B)` within `1e-10` relative to `|B|`.
pub fn check_kernel_inclusion(b: &CMat, ad: &CMat, tol: &Tolerances) -> bool {
    b.ncols() == ad.ncols() && kernel_inclusion_witness(b, ad, tol).0 <= 1e-10
}

/// Kernel inclusion for a possibly frequency-dependent operator, tested at
/// the reference point and a few hemisphere samples. Fails with a witness.
pub fn require_kernel_inclusion(system: &HyperbolicSystem, b: &BoundaryOperator, tol: &Tolerances) -> Result<()> {
    if b.n() != system.n {
        return Err(Error::InvalidInput(format!(
            "boundary operator has {} columns, system has N = {}",
            b.n(),
            system.n
        )));
    }
    let mut freqs = vec![reference_frequency(system.d)];
    if b.as_constant().is_none() {
        for dir in sampling::sphere_points(system.d, 16, 0) {
            freqs.push(Frequency::on_hemisphere(&dir, 0.5)?);
        }
    }
    for f in freqs {
        let m = b.matrix_at(&f);
        let (residual, witness) = kernel_inclusion_witness(&m, system.ad(), tol);
        if residual > 1e-10 {
            let w = witness.expect("positive residual has a witness");
            return Err(Error::KernelInclusionFailed {
                witness: w.iter().map(|z| [z.re, z.im]).collect(),
                residual,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// `min |Bv| / |A^d v|` over the stable subspace.
    AdWeighted,
    /// `min |Bv| / |v|` over the stable subspace.
    IdentityWeighted,
}

/// Smallest singular value of `B V_s (A^d V_s)^+` or of `B V_s`.
pub fn ks_ratio(b: &CMat, ad: &CMat, stable_basis: &CMat, weight: Weight, tol: &Tolerances) -> Result<f64> {
    let bv = b * stable_basis;
    match weight {
        Weight::IdentityWeighted => Ok(linalg::sigma_min(&bv)),
        Weight::AdWeighted => {
            let av = ad * stable_basis;
            let cond = linalg::condition_number(&av);
            if !(cond <= tol.weight_condition) {
                return Err(Error::DegenerateWeight {
                    condition: cond,
                    limit: tol.weight_condition,
                });
            }
            let pinv = linalg::pseudo_inverse(&av, 0.0);
            Ok(linalg::sigma_min(&(bv * pinv)))
        }
    }
}

/// Ratio at one frequency, straight from the system.
pub fn ks_ratio_at(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    freq: &Frequency,
    weight: Weight,
    tol: &Tolerances,
) -> Result<f64> {
    let decomp = pencil_eigen(system.ad(), &build_g(system, freq), tol)?;
    if decomp.mu != b.mu() {
        return Err(Error::InvalidInput(format!(
            "boundary operator has {} rows but dim E^s = {}",
            b.mu(),
            decomp.mu
        )));
    }
    ks_ratio(&b.matrix_at(freq), system.ad(), &decomp.stable_basis, weight, tol)
}

/// Frequencies examined on each `gamma` slice of the hemisphere: a
/// low-discrepancy set of tangential directions plus explicitly seeded
/// directions where the minimum is expected.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub freq_samples: usize,
    pub seed: u64,
    /// Unit `(tau, eta)` directions, typically on a worst-case cone.
    pub extra_directions: Vec<Vec<f64>>,
}

impl SamplingPlan {
    pub fn new(freq_samples: usize, seed: u64) -> Self {
        Self {
            freq_samples,
            seed,
            extra_directions: Vec::new(),
        }
    }

    pub fn with_directions(mut self, dirs: Vec<Vec<f64>>) -> Self {
        self.extra_directions = dirs;
        self
    }

    fn directions(&self, d: usize) -> Vec<Vec<f64>> {
        let mut dirs = sampling::sphere_points(d, self.freq_samples, self.seed);
        dirs.extend(self.extra_directions.iter().cloned());
        dirs
    }
}

/// Minimum ratio on the slice `gamma` of the hemisphere and its argmin.
fn slice_minimum(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    dirs: &[Vec<f64>],
    gamma: f64,
    weight: Weight,
    tol: &Tolerances,
) -> Result<(f64, Frequency)> {
    let values = parallel::map_indexed(dirs.len(), |k| -> Result<(f64, Frequency)> {
        let f = Frequency::on_hemisphere(&dirs[k], gamma)?;
        Ok((ks_ratio_at(system, b, &f, weight, tol)?, f))
    });
    let mut best: Option<(f64, Frequency)> = None;
    for v in values {
        let (r, f) = v?;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, f));
        }
    }
    best.ok_or_else(|| Error::InvalidInput("no sample directions".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerEstimate {
    /// Fitted power clamped to `[0, 1]`.
    pub s_hat: f64,
    pub raw_slope: f64,
    pub fit_range: (f64, f64),
    /// `(gamma, rho_min)` for every grid point, ascending in gamma.
    pub per_gamma_rho: Vec<(f64, f64)>,
    pub regression_r2: f64,
    pub worst_frequencies: Vec<Frequency>,
    /// Set when the regression is poor; the estimate is still reported.
    pub fit_warning: Option<Error>,
}

/// Least-squares slope and `r^2` of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Fits `log rho_min` against `log gamma` over the lowest decade of the grid.
pub fn estimate_power(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    gamma_grid: &[f64],
    plan: &SamplingPlan,
    tol: &Tolerances,
) -> Result<PowerEstimate> {
    if gamma_grid.len() < 6 || gamma_grid.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
        return Err(Error::InvalidInput(
            "gamma grid needs at least 6 points inside (0, 1)".into(),
        ));
    }
    require_kernel_inclusion(system, b, tol)?;
    let mut grid = gamma_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let dirs = plan.directions(system.d);
    let mut per_gamma_rho = Vec::with_capacity(grid.len());
    let mut worst_frequencies = Vec::with_capacity(grid.len());
    for &gamma in &grid {
        let (rho, f) = slice_minimum(system, b, &dirs, gamma, Weight::AdWeighted, tol)?;
        per_gamma_rho.push((gamma, rho));
        worst_frequencies.push(f);
    }
    let lo = grid[0];
    let hi = lo * 10.0 * (1.0 + 1e-12);
    let fit: Vec<(f64, f64)> = per_gamma_rho.iter().filter(|(g, _)| *g <= hi).copied().collect();
    if fit.len() < 2 {
        return Err(Error::InvalidInput("fewer than two grid points in the lowest decade".into()));
    }
    if fit.iter().any(|(_, r)| !(*r > 0.0)) {
        return Err(Error::InvalidInput("zero ratio: the Lopatinskii condition fails at a sample".into()));
    }
    let x: Vec<f64> = fit.iter().map(|(g, _)| g.ln()).collect();
    let y: Vec<f64> = fit.iter().map(|(_, r)| r.ln()).collect();
    let (slope, _, r2) = linear_fit(&x, &y);
    let fit_warning = (r2 < 0.9).then_some(Error::FitUnstable { r2, threshold: 0.9 });
    Ok(PowerEstimate {
        s_hat: slope.clamp(0.0, 1.0),
        raw_slope: slope,
        fit_range: (fit[0].0, fit[fit.len() - 1].0),
        per_gamma_rho,
        regression_r2: r2,
        worst_frequencies,
        fit_warning,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformKs {
    pub holds: bool,
    pub inf_ratio: f64,
    /// `(gamma, min ratio)` per decade, descending in gamma.
    pub per_decade: Vec<(f64, f64)>,
    pub worst: Frequency,
}

/// Decades examined by [`check_uniform_ks`].
pub const UNIFORM_KS_GAMMAS: [f64; 5] = [1.0e-0, 1.0e-1, 1.0e-2, 1.0e-3, 1.0e-4];

/// Infimum of the identity-weighted ratio; the condition holds when it stays
/// above `tol.uniform_ks` and the two smallest decades agree within 50%.
pub fn check_uniform_ks(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    plan: &SamplingPlan,
    tol: &Tolerances,
) -> Result<UniformKs> {
    let dirs = plan.directions(system.d);
    let mut per_decade = Vec::new();
    let mut worst: Option<(f64, Frequency)> = None;
    for &g in &UNIFORM_KS_GAMMAS {
        // gamma = 1 is the pole of the hemisphere: tangential part vanishes.
        let gamma = g.min(1.0 - 1e-12);
        let (r, f) = slice_minimum(system, b, &dirs, gamma, Weight::IdentityWeighted, tol)?;
        per_decade.push((g, r));
        if worst.as_ref().is_none_or(|(w, _)| r < *w) {
            worst = Some((r, f));
        }
    }
    let (inf_ratio, worst) = worst.expect("non-empty decade list");
    let k = per_decade.len();
    let (a, c) = (per_decade[k - 2].1, per_decade[k - 1].1);
    let stable = (a - c).abs() < 0.5 * a.max(c);
    Ok(UniformKs {
        holds: inf_ratio > tol.uniform_ks && stable,
        inf_ratio,
        per_decade,
        worst,
    })
}
