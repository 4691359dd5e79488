//! The first-order system `A^0 u_t + sum_j A^j u_{x_j} = f`, its boundary
//! symbol `G` and hyperbolicity checks.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::algebra::{self, pencil_eigen};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, CMat, I};
use crate::parallel;
use crate::sampling;

/// A point `(tau, eta, gamma)` of the Laplace-Fourier dual half-space.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequency {
    pub tau: f64,
    pub eta: Vec<f64>,
    pub gamma: f64,
}

impl Frequency {
    pub fn new(tau: f64, eta: Vec<f64>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !tau.is_finite() || eta.iter().any(|e| !e.is_finite()) || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "frequency needs finite entries and gamma > 0 (tau={tau}, eta={eta:?}, gamma={gamma})"
            )));
        }
        Ok(Self { tau, eta, gamma })
    }

    /// `(tau^2 + |eta|^2 + gamma^2)^{1/2}`.
    pub fn magnitude(&self) -> f64 {
        (self.tau * self.tau + self.eta_norm_sqr() + self.gamma * self.gamma).sqrt()
    }

    pub fn eta_norm_sqr(&self) -> f64 {
        self.eta.iter().map(|e| e * e).sum()
    }

    /// Projection onto the hemisphere `tau^2 + |eta|^2 + gamma^2 = 1`.
    pub fn normalized(&self) -> Self {
        let m = self.magnitude();
        self.scaled(1.0 / m)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            tau: self.tau * s,
            eta: self.eta.iter().map(|e| e * s).collect(),
            gamma: self.gamma * s,
        }
    }

    /// `tau - i gamma`.
    pub fn complex_tau(&self) -> C64 {
        C64::new(self.tau, -self.gamma)
    }

    /// Hemisphere point with the given `gamma` in the tangential direction
    /// `dir` (a unit vector of `(tau, eta)`).
    pub fn on_hemisphere(dir: &[f64], gamma: f64) -> Result<Self> {
        let scale = (1.0 - gamma * gamma).max(0.0).sqrt();
        Frequency::new(dir[0] * scale, dir[1..].iter().map(|e| e * scale).collect(), gamma)
    }

    pub fn as_vec(&self) -> Vec<f64> {
        let mut v = vec![self.tau];
        v.extend_from_slice(&self.eta);
        v.push(self.gamma);
        v
    }
}

/// A boundary symbol that is not linear in the frequency, for instance a
/// first-order reduction built with Fourier multipliers.
///
/// Implementations must be positively homogeneous of degree one.
pub trait CustomSymbol: Send + Sync {
    fn tag(&self) -> &str;
    fn symbol(&self, freq: &Frequency) -> CMat;
    /// Real characteristic roots `tau` with multiplicities for a unit `xi`.
    fn characteristic_roots(&self, xi: &[f64]) -> Vec<(f64, usize)>;
}

#[derive(Clone)]
pub enum Symbol {
    /// `G = -i [A^0 (tau - i gamma) + sum_j A^j eta_j]` from the matrices `A^0..A^d`.
    Linear(Vec<CMat>),
    Custom(Arc<dyn CustomSymbol>),
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Linear(a) => f.debug_tuple("Linear").field(&a.len()).finish(),
            Symbol::Custom(s) => f.debug_tuple("Custom").field(&s.tag()).finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HyperbolicSystem {
    pub name: String,
    pub d: usize,
    pub n: usize,
    boundary: CMat,
    pub symbol: Symbol,
}

impl HyperbolicSystem {
    /// System given by its coefficient matrices `A^0, ..., A^d`.
    pub fn linear(name: impl Into<String>, a: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidInput("need at least A^0 and A^1".into()));
        }
        let n = a[0].nrows();
        if n == 0 || a.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::InvalidInput("coefficient matrices must be square N x N".into()));
        }
        let r = linalg::rcond(&a[0]);
        if !(r > tol.singular) {
            return Err(Error::InvalidInput(format!(
                "A^0 must be invertible (reciprocal condition {r:.3e})"
            )));
        }
        let d = a.len() - 1;
        Ok(Self {
            name: name.into(),
            d,
            n,
            boundary: a[d].clone(),
            symbol: Symbol::Linear(a),
        })
    }

    pub fn custom(name: impl Into<String>, d: usize, boundary: CMat, symbol: Arc<dyn CustomSymbol>) -> Result<Self> {
        let n = boundary.nrows();
        if d == 0 || n == 0 || boundary.ncols() != n {
            return Err(Error::InvalidInput("custom system needs d >= 1 and square A^d".into()));
        }
        Ok(Self {
            name: name.into(),
            d,
            n,
            boundary,
            symbol: Symbol::Custom(symbol),
        })
    }

    /// The boundary matrix `A^d`.
    pub fn ad(&self) -> &CMat {
        &self.boundary
    }

    pub fn matrices(&self) -> Option<&[CMat]> {
        match &self.symbol {
            Symbol::Linear(a) => Some(a),
            Symbol::Custom(_) => None,
        }
    }

    /// `P(tau, xi) = A^0 tau + sum_j A^j xi_j`, linear systems only.
    pub fn principal_symbol(&self, tau: f64, xi: &[f64]) -> Option<CMat> {
        let a = self.matrices()?;
        let mut p = &a[0] * C64::new(tau, 0.0);
        for (j, x) in xi.iter().enumerate() {
            p += &a[j + 1] * C64::new(*x, 0.0);
        }
        Some(p)
    }
}

/// The boundary symbol `G(tau - i gamma, eta)`.
pub fn build_g(system: &HyperbolicSystem, freq: &Frequency) -> CMat {
    debug_assert_eq!(freq.eta.len(), system.d - 1);
    match &system.symbol {
        Symbol::Linear(a) => {
            let mut m = &a[0] * freq.complex_tau();
            for (j, e) in freq.eta.iter().enumerate() {
                m += &a[j + 1] * C64::new(*e, 0.0);
            }
            m * (-I)
        }
        Symbol::Custom(s) => s.symbol(freq),
    }
}

/// Largest relative deviation from `G(s w) = s G(w)` over sampled points.
pub fn homogeneity_defect(system: &HyperbolicSystem, samples: usize, seed: u64) -> f64 {
    let mut worst = 0.0_f64;
    for k in 0..samples {
        let mut rng = sampling::rng_for(seed, k as u64);
        let dir = sampling::random_unit(&mut rng, system.d);
        let gamma = rng.random_range(0.05..1.0);
        let Ok(f) = Frequency::on_hemisphere(&dir, gamma) else { continue };
        let g = build_g(system, &f);
        for s in [0.5, 2.0, 3.7] {
            let gs = build_g(system, &f.scaled(s));
            let scale = (g.norm() * s).max(f64::MIN_POSITIVE);
            worst = worst.max((gs - &g * C64::new(s, 0.0)).norm() / scale);
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub symmetric: bool,
    pub constantly_hyperbolic: bool,
    pub strictly_hyperbolic: bool,
    pub characteristic_boundary: bool,
    pub mu: usize,
    pub diagnostics: Vec<(String, f64)>,
}

/// Real characteristic roots of `det P(tau, xi) = 0`, sorted, with
/// multiplicities. Fails when a root is not real or an eigenspace is
/// deficient.
pub fn characteristic_roots(system: &HyperbolicSystem, xi: &[f64], tol: &Tolerances) -> Result<Vec<(f64, usize)>> {
    if xi.len() != system.d {
        return Err(Error::InvalidInput(format!("xi must have length d = {}", system.d)));
    }
    let a = match &system.symbol {
        Symbol::Custom(s) => return Ok(s.characteristic_roots(xi)),
        Symbol::Linear(a) => a,
    };
    let p = system.principal_symbol(0.0, xi).expect("linear");
    let a0_inv = linalg::inverse(&a[0], tol.singular)?;
    let m = -(&a0_inv * &p);
    let scale = m.norm().max(a[0].norm()).max(1.0);
    let (_, t) = linalg::schur(&m)?;
    let mut roots: Vec<C64> = (0..system.n).map(|i| t[(i, i)]).collect();
    for r in &roots {
        if r.im.abs() > tol.root_imag * scale {
            return Err(Error::NotHyperbolic {
                xi: xi.to_vec(),
                reason: format!("complex characteristic root {r}"),
                margin: r.im.abs() / scale,
            });
        }
    }
    roots.sort_by(|x, y| x.re.total_cmp(&y.re));
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for r in roots {
        match clusters.last_mut() {
            Some(cl) if (r.re - cl[cl.len() - 1]).abs() <= tol.root_cluster * scale => cl.push(r.re),
            _ => clusters.push(vec![r.re]),
        }
    }
    let mut out = Vec::with_capacity(clusters.len());
    for cl in clusters {
        let root = cl.iter().sum::<f64>() / cl.len() as f64;
        let alg = cl.len();
        let pm = system.principal_symbol(root, xi).expect("linear");
        let rank = linalg::numerical_rank(&pm, 1e-7);
        let geo = system.n - rank;
        if geo < alg {
            return Err(Error::NotHyperbolic {
                xi: xi.to_vec(),
                reason: format!(
                    "root {root:.6e} has algebraic multiplicity {alg} but eigenspace dimension {geo}"
                ),
                margin: (alg - geo) as f64,
            });
        }
        out.push((root, alg));
    }
    Ok(out)
}

/// A fixed interior hemisphere point used for `mu`.
pub fn reference_frequency(d: usize) -> Frequency {
    let mut dir = vec![0.31];
    for j in 1..d {
        dir.push(0.17 + 0.05 * j as f64);
    }
    let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dir: Vec<f64> = dir.iter().map(|x| x / n).collect();
    Frequency::on_hemisphere(&dir, 0.8).expect("gamma > 0")
}

pub fn classify(system: &HyperbolicSystem, sphere_samples: usize, seed: u64, tol: &Tolerances) -> Result<Classification> {
    if sphere_samples == 0 {
        return Err(Error::InvalidInput("sphere_samples must be >= 1".into()));
    }
    let mut diagnostics = Vec::new();

    let symmetric = match system.matrices() {
        Some(a) => {
            let mut herm_margin = 0.0_f64;
            for m in a {
                herm_margin = herm_margin.max(linalg::is_hermitian(m, 1e-12).1);
            }
            let (vals, _) = linalg::hermitian_eigen(&a[0]);
            let scale = vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
            let pd_margin = vals[0] / scale;
            diagnostics.push(("hermitian_defect".to_string(), herm_margin));
            diagnostics.push(("a0_min_eigenvalue_relative".to_string(), pd_margin));
            herm_margin <= 1e-12 && pd_margin > 0.0
        }
        None => {
            diagnostics.push(("custom_symbol".to_string(), 0.0));
            false
        }
    };

    let points = sampling::sphere_points(system.d, sphere_samples, seed);
    let results = parallel::map_indexed(points.len(), |k| characteristic_roots(system, &points[k], tol));
    let mut pattern: Option<Vec<usize>> = None;
    let mut constant = true;
    let mut strict = true;
    for r in results {
        let roots = r?;
        let mults: Vec<usize> = roots.iter().map(|(_, m)| *m).collect();
        if mults.iter().any(|&m| m > 1) {
            strict = false;
        }
        match &pattern {
            None => pattern = Some(mults),
            Some(p) if *p != mults => constant = false,
            _ => {}
        }
    }
    diagnostics.push(("sphere_samples".to_string(), sphere_samples as f64));

    let ad_rcond = linalg::rcond(system.ad());
    diagnostics.push(("ad_reciprocal_condition".to_string(), ad_rcond));
    let characteristic_boundary = linalg::numerical_rank(system.ad(), tol.rank) < system.n;

    let f = reference_frequency(system.d);
    let decomp = pencil_eigen(system.ad(), &build_g(system, &f), tol)?;

    Ok(Classification {
        symmetric,
        constantly_hyperbolic: constant,
        strictly_hyperbolic: constant && strict,
        characteristic_boundary,
        mu: decomp.mu,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSample {
    pub tau: f64,
    pub xi: Vec<f64>,
    pub gamma: f64,
    pub value: f64,
}

/// `sup gamma |(i xi_d A^d - G(tau - i gamma, xi'))^{-1}|` over sampled points.
///
/// Half of the samples put `tau` on a characteristic root of `xi`, where the
/// supremum is attained for symmetric systems; the rest are uniform.
pub fn check_resolvent_bound(
    system: &HyperbolicSystem,
    samples: usize,
    gamma_set: &[f64],
    seed: u64,
    tol: &Tolerances,
) -> Result<ResolventSample> {
    if gamma_set.is_empty() || gamma_set.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidInput("gamma_set must be non-empty and positive".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    let d = system.d;
    let results = parallel::map_indexed(samples, |k| -> Result<ResolventSample> {
        let mut rng = sampling::rng_for(seed, k as u64);
        let gamma = gamma_set[k % gamma_set.len()];
        let dir = sampling::random_unit(&mut rng, d);
        let radius = gamma * 10f64.powf(rng.random_range(-2.0..3.0));
        let roots = characteristic_roots(system, &dir, tol)?;
        let tau = if k % 2 == 0 && !roots.is_empty() {
            let pick = rng.random_range(0..roots.len());
            roots[pick].0 * radius
        } else {
            radius * rng.random_range(-3.0..3.0)
        };
        let xi: Vec<f64> = dir.iter().map(|x| x * radius).collect();
        let freq = Frequency::new(tau, xi[..d - 1].to_vec(), gamma)?;
        let g = build_g(system, &freq);
        let value = gamma * algebra::resolvent_norm(system.ad(), &g, xi[d - 1], tol)?;
        Ok(ResolventSample { tau, xi, gamma, value })
    });
    let mut best: Option<ResolventSample> = None;
    for r in results {
        let s = r?;
        // Strict comparison keeps the lowest index on ties.
        if best.as_ref().is_none_or(|b| s.value > b.value) {
            best = Some(s);
        }
    }
    Ok(best.expect("samples >= 1"))
}
