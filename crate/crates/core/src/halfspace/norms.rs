use crate::algebra::pencil_eigen;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hyperbolic::{build_g, Frequency, HyperbolicSystem};
use crate::io::GridField;
use crate::linalg::{self, CMat, CVec};
use crate::lopatinskii::BoundaryOperator;
use crate::parallel;

use super::fft::{fft_axes, Lattice};
use super::frequency::{solve_frequency, FrequencyProblem, FrequencySolution, SolverOptions, XGrid};
use super::spacetime::HalfspaceSolution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevParams {
    pub s: f64,
    pub gamma: f64,
}

impl SobolevParams {
    pub fn new(s: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!("Sobolev weight needs gamma > 0 (got {gamma})")));
        }
        Ok(Self { s, gamma })
    }

    /// `(gamma^2 + tau^2 + |eta|^2)^s`.
    pub fn weight(&self, tangential: &[f64]) -> f64 {
        let m2 = self.gamma * self.gamma + tangential.iter().map(|x| x * x).sum::<f64>();
        if self.s == 0.0 {
            1.0
        } else {
            m2.powf(self.s)
        }
    }
}

/// Weighted sum over tangential bins; `tangential_dims` leading axes of the
/// field are transformed, the rest are summed with their cell size.
fn weighted_norm(field: &GridField, tangential_dims: usize, params: &SobolevParams) -> f64 {
    let mut data = field.data.clone();
    let axes: Vec<usize> = (0..tangential_dims).collect();
    fft_axes(&mut data, &field.dims, field.components, &axes, false);
    let lattice = Lattice::new(field.dims[..tangential_dims].to_vec(), field.spacings[..tangential_dims].to_vec());
    let inner: usize = field.dims[tangential_dims..].iter().product::<usize>() * field.components;
    let cell_rest: f64 = field.spacings[tangential_dims..].iter().product();
    let mut total = 0.0;
    // Trapezoidal weights in x_d, unit weights on the periodic axes.
    let nx = if tangential_dims < field.dims.len() { field.dims[tangential_dims] } else { 1 };
    let per_x = inner / nx;
    for bin in 0..lattice.len() {
        let w = params.weight(&lattice.frequency(bin));
        let chunk = &data[bin * inner..(bin + 1) * inner];
        let mut e: f64 = chunk.iter().map(|z| z.norm_sqr()).sum();
        if nx > 1 {
            let ends: f64 = chunk[..per_x].iter().chain(&chunk[inner - per_x..]).map(|z| z.norm_sqr()).sum();
            e -= 0.5 * ends;
        }
        total += w * e;
    }
    total * lattice.parseval_factor() * cell_rest
}

/// `|g|^2_{s,gamma}` of a boundary field on the `(t, y)` grid. With `s = 0`
/// this is the grid `L2` norm squared.
pub fn sobolev_boundary(g: &GridField, params: &SobolevParams) -> f64 {
    weighted_norm(g, g.dims.len(), params)
}

/// `||f||^2_{s,gamma}` of an interior field on the `(t, y, x_d)` grid.
pub fn sobolev_interior(f: &GridField, params: &SobolevParams) -> f64 {
    weighted_norm(f, f.dims.len() - 1, params)
}

fn weighted_by_time(field: &GridField, gamma: f64) -> GridField {
    let mut out = field.clone();
    let per_t = field.data.len() / field.dims[0];
    for k in 0..field.dims[0] {
        let w = (-gamma * field.spacings[0] * k as f64).exp();
        for z in &mut out.data[k * per_t..(k + 1) * per_t] {
            *z *= w;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    /// Solution in `L2`, data in `H^s`.
    Standard,
    /// Solution in `H^{-s}`, data in `L2`.
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRatio {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, reported as 0 when both vanish.
    pub ratio: f64,
}

impl EstimateRatio {
    fn new(lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self { lhs, rhs, ratio }
    }
}

/// Both sides of the weighted estimate
/// `gamma |e^{-gamma t} u|^2 + |e^{-gamma t} A^d u(0)|^2` against
/// `gamma^{-1-2s} |e^{-gamma t} f|^2_{s,gamma} + gamma^{-2s} |e^{-gamma t} g|^2_{s,gamma}`.
pub fn verify_weighted_estimate(
    solution: &HalfspaceSolution,
    f: &GridField,
    g: &GridField,
    s: f64,
    mode: EstimateMode,
) -> Result<EstimateRatio> {
    let gamma = solution.gamma;
    let fw = weighted_by_time(f, gamma);
    let gw = weighted_by_time(g, gamma);
    let (sol_p, data_p) = match mode {
        EstimateMode::Standard => (SobolevParams::new(0.0, gamma)?, SobolevParams::new(s, gamma)?),
        EstimateMode::Shifted => (SobolevParams::new(-s, gamma)?, SobolevParams::new(0.0, gamma)?),
    };
    let lhs = gamma * sobolev_interior(&solution.weighted, &sol_p) + sobolev_boundary(&solution.weighted_trace, &sol_p);
    let rhs = gamma.powf(-1.0 - 2.0 * s) * sobolev_interior(&fw, &data_p)
        + gamma.powf(-2.0 * s) * sobolev_boundary(&gw, &data_p);
    Ok(EstimateRatio::new(lhs, rhs))
}

/// One tangential frequency `(tau, eta)` of spectrally given data with its
/// quadrature weight. `f_hat` is `None` for homogeneous interior data.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDatum {
    pub tangential: Vec<f64>,
    pub weight: f64,
    pub f_hat: Option<(XGrid, CMat)>,
    pub g_hat: CVec,
}

/// The same estimate evaluated frequency by frequency (Parseval form).
///
/// With `f_hat = None` the decaying solution is `V_s e^{x S} y` and its
/// `L2` norm comes from the Lyapunov Gramian, so no `x_d` grid is involved.
pub fn weighted_estimate_spectral(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    data: &[SpectralDatum],
    gamma: f64,
    s: f64,
    mode: EstimateMode,
    tol: &Tolerances,
) -> Result<EstimateRatio> {
    let parts = parallel::map_indexed(data.len(), |k| -> Result<(f64, f64)> {
        let d = &data[k];
        let freq = Frequency::new(d.tangential[0], d.tangential[1..].to_vec(), gamma)?;
        let m2 = freq.magnitude().powi(2);
        let (sol_w, data_w) = match mode {
            EstimateMode::Standard => (1.0, m2.powf(s)),
            EstimateMode::Shifted => (m2.powf(-s), 1.0),
        };
        let (interior, trace) = match &d.f_hat {
            None => {
                let g = build_g(system, &freq);
                let decomp = pencil_eigen(system.ad(), &g, tol)?;
                let bv = b.matrix_at(&freq) * &decomp.stable_basis;
                let y = bv.lu().solve(&d.g_hat).ok_or(Error::RankDeficientJ {
                    ratio: 0.0,
                    threshold: tol.j_rank,
                })?;
                let gram = decomp.stable_gramian()?;
                let interior = (y.adjoint() * &gram * &y)[(0, 0)].re;
                let trace = (system.ad() * &decomp.stable_basis * &y).norm_squared();
                (interior, trace)
            }
            Some((grid, f_hat)) => {
                let problem = FrequencyProblem {
                    freq: freq.clone(),
                    grid: *grid,
                    f_hat: f_hat.clone(),
                    g_hat: d.g_hat.clone(),
                };
                let sol = solve_frequency(system, b, &problem, &SolverOptions::default(), tol)?;
                (grid.l2_sqr(&sol.u), sol.weighted_trace.norm_squared())
            }
        };
        let f2 = d.f_hat.as_ref().map_or(0.0, |(grid, f)| grid.l2_sqr(f));
        let lhs = d.weight * sol_w * (gamma * interior + trace);
        let rhs = d.weight
            * data_w
            * (gamma.powf(-1.0 - 2.0 * s) * f2 + gamma.powf(-2.0 * s) * d.g_hat.norm_squared());
        Ok((lhs, rhs))
    });
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for p in parts {
        let (l, r) = p?;
        lhs += l;
        rhs += r;
    }
    Ok(EstimateRatio::new(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBoundRatios {
    /// `(gamma int |V|^2 + sum |lambda_-| |c_-|^2) / rhs`, at most 1.
    pub interior_ratio: f64,
    /// `|A~^d V(0)|^2 / (max |lambda| rhs)`, at most 2.
    pub trace_ratio: f64,
    /// `gamma int |V|^2`.
    pub interior: f64,
    /// `|A~^d V(0)|^2`.
    pub trace: f64,
    /// `gamma^{-1} int |f~|^2 + sum lambda_+ |c_+|^2`.
    pub rhs: f64,
}

/// Energy-estimate ratios for symmetric systems.
///
/// With `V = (A^0)^{1/2} U`, `f~ = (A^0)^{-1/2} f` and `A~^d` the congruent
/// normal matrix with eigenpairs `(lambda_k, e_k)`, `c_k = e_k^H V(0)`, the
/// energy identity gives
/// `gamma int |V|^2 + sum |lambda_-| |c_-|^2 <= gamma^{-1} int |f~|^2 + sum lambda_+ |c_+|^2`
/// and hence `|A~^d V(0)|^2 <= 2 max |lambda| rhs`.
pub fn verify_energy_bound(
    system: &HyperbolicSystem,
    solution: &FrequencySolution,
    problem: &FrequencyProblem,
) -> Result<EnergyBoundRatios> {
    let a = system.matrices().ok_or_else(|| Error::NotSymmetric {
        reason: "custom symbols carry no coefficient matrices".into(),
        margin: f64::NAN,
    })?;
    for (k, m) in a.iter().enumerate() {
        let (ok, margin) = linalg::is_hermitian(m, 1e-12);
        if !ok {
            return Err(Error::NotSymmetric {
                reason: format!("A^{k} is not Hermitian"),
                margin,
            });
        }
    }
    let inv_sqrt = linalg::hermitian_inv_sqrt(&a[0])?;
    let sqrt = linalg::inverse(&inv_sqrt, 1e-14)?;
    let ad_t = &inv_sqrt * system.ad() * &inv_sqrt;
    let (values, vectors) = linalg::hermitian_eigen(&ad_t);
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let v0 = &sqrt * &solution.trace;
    let (mut plus, mut minus) = (0.0, 0.0);
    for (k, &lam) in values.iter().enumerate() {
        let c = vectors.column(k).dotc(&v0).norm_sqr();
        if lam > 0.0 {
            plus += lam * c;
        } else {
            minus -= lam * c;
        }
    }
    let gamma = problem.freq.gamma;
    let interior = gamma * solution.grid.l2_sqr(&(&sqrt * &solution.u));
    let trace = (&ad_t * &v0).norm_squared();
    let rhs = problem.grid.l2_sqr(&(&inv_sqrt * &problem.f_hat)) / gamma + plus;
    let (interior_ratio, trace_ratio) = if rhs > 0.0 {
        ((interior + minus) / rhs, trace / (scale * rhs))
    } else {
        (0.0, 0.0)
    };
    Ok(EnergyBoundRatios {
        interior_ratio,
        trace_ratio,
        interior,
        trace,
        rhs,
    })
}

