//! Worked examples with closed-form oracles: the wave equation with Neumann
//! and oblique derivative conditions, isotropic Maxwell, and small controls
//! that satisfy the uniform condition.

use std::sync::Arc;

use crate::algebra::{pencil_eigen, spectral_projector, contour_from_spectrum};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hyperbolic::{build_g, CustomSymbol, Frequency, HyperbolicSystem, Symbol};
use crate::halfspace::SpectralDatum;
use crate::linalg::{self, from_real, principal_sqrt, re, C64, CMat, CVec, I};
use crate::lopatinskii::{BoundaryOperator, BoundarySymbol, SamplingPlan};

/// `|eta|^2 - (tau - i gamma)^2`.
pub fn wave_q(freq: &Frequency) -> C64 {
    let z = freq.complex_tau();
    re(freq.eta_norm_sqr()) - z * z
}

/// First-order reduction of the wave operator in the variables
/// `(d_d w, Lambda w)`, `Lambda` the multiplier `(tau^2 + |eta|^2 + gamma^2)^{1/2}`.
#[derive(Debug, Clone)]
pub struct WaveSymbol;

pub const WAVE_TAG: &str = "wave";
pub const OBLIQUE_TAG: &str = "oblique";

impl CustomSymbol for WaveSymbol {
    fn tag(&self) -> &str {
        WAVE_TAG
    }

    fn symbol(&self, freq: &Frequency) -> CMat {
        let m = freq.magnitude();
        let q = wave_q(freq);
        CMat::from_row_slice(2, 2, &[re(0.0), q / m, re(m), re(0.0)])
    }

    fn characteristic_roots(&self, xi: &[f64]) -> Vec<(f64, usize)> {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        vec![(-r, 1), (r, 1)]
    }
}

/// `d_d u + b . grad_y u` in the reduced variables: the row `[1, -i b.eta / Lambda]`.
#[derive(Debug, Clone)]
pub struct ObliqueBoundary {
    pub b: Vec<f64>,
}

impl BoundarySymbol for ObliqueBoundary {
    fn tag(&self) -> &str {
        OBLIQUE_TAG
    }
    fn mu(&self) -> usize {
        1
    }
    fn n(&self) -> usize {
        2
    }
    fn params(&self) -> Vec<f64> {
        self.b.clone()
    }
    fn matrix(&self, freq: &Frequency) -> CMat {
        let beta: f64 = self.b.iter().zip(&freq.eta).map(|(b, e)| b * e).sum();
        CMat::from_row_slice(1, 2, &[re(1.0), -I * (beta / freq.magnitude())])
    }
}

/// Closed-form eigenstructure used as an oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForms {
    Wave,
    Maxwell { eps: f64, mu_perm: f64 },
    Diagonal,
}

impl ClosedForms {
    /// The stable eigenvalue (it is unique up to multiplicity in every preset).
    pub fn stable_eigenvalue(&self, freq: &Frequency) -> C64 {
        match self {
            ClosedForms::Wave => -principal_sqrt(wave_q(freq)),
            ClosedForms::Maxwell { eps, mu_perm } => maxwell_xi(freq, *eps, *mu_perm),
            ClosedForms::Diagonal => -freq.gamma - I * freq.tau,
        }
    }

    /// Columns spanning `E^s` (not normalized).
    pub fn stable_basis(&self, freq: &Frequency) -> CMat {
        match self {
            ClosedForms::Wave => {
                let m = freq.magnitude();
                let s = principal_sqrt(wave_q(freq));
                CMat::from_column_slice(2, 1, &[s / m, re(-1.0)])
            }
            ClosedForms::Maxwell { eps, mu_perm } => {
                let (w1, w2) = maxwell_basis(freq, *eps, *mu_perm);
                let mut m = CMat::zeros(6, 2);
                m.set_column(0, &w1);
                m.set_column(1, &w2);
                m
            }
            ClosedForms::Diagonal => CMat::from_column_slice(2, 1, &[re(1.0), re(0.0)]),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub system: HyperbolicSystem,
    pub b: BoundaryOperator,
    pub expected_power: f64,
    pub closed_forms: Option<ClosedForms>,
    /// Unit `(tau, eta)` directions on the manifold where the boundary
    /// ratio is smallest.
    pub worst_directions: Vec<Vec<f64>>,
}

impl Preset {
    /// Sampling plan with the worst-case directions seeded in.
    pub fn sampling_plan(&self, freq_samples: usize, seed: u64) -> SamplingPlan {
        SamplingPlan::new(freq_samples, seed).with_directions(self.worst_directions.clone())
    }
}

pub const PRESET_NAMES: [&str; 5] = [
    "wave_neumann",
    "wave_oblique",
    "maxwell",
    "symmetric_control",
    "acoustic_control",
];

/// Presets by name with default parameters.
pub fn preset_by_name(name: &str) -> Result<Preset> {
    match name {
        "wave_neumann" => wave_neumann(2),
        "wave_oblique" => wave_oblique(2, &[1.0]),
        "maxwell" => maxwell(1.0, 1.0),
        "symmetric_control" => symmetric_control(0.0),
        "acoustic_control" => acoustic_control(),
        _ => Err(Error::InvalidInput(format!(
            "unknown preset '{name}' (known: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Wraps a system read from a spec file as a preset, recognising the wave
/// reduction and Maxwell's equations so their closed forms and worst-case
/// directions come along.
pub fn infer_preset(system: HyperbolicSystem, b: BoundaryOperator) -> Preset {
    let name = system.name.clone();
    let mut preset = Preset {
        name,
        system,
        b,
        expected_power: 0.0,
        closed_forms: None,
        worst_directions: Vec::new(),
    };
    if let Symbol::Custom(s) = &preset.system.symbol {
        if s.tag() == WAVE_TAG {
            let oblique = preset.b.tag() == Some(OBLIQUE_TAG);
            preset.expected_power = if oblique { 1.0 } else { 0.5 };
            preset.closed_forms = Some(ClosedForms::Wave);
            preset.worst_directions = glancing_directions(preset.system.d);
            if oblique {
                preset.worst_directions.push(oblique_worst_direction(&preset.b.params()));
            }
        }
        return preset;
    }
    let a = preset.system.matrices().expect("linear system");
    if a.len() == 4 && a[0].nrows() == 6 {
        let (eps, mu_perm) = (a[0][(0, 0)].re, a[0][(3, 3)].re);
        let same = eps > 0.0
            && mu_perm > 0.0
            && maxwell_matrices(eps, mu_perm).iter().zip(a).all(|(m, x)| (m - x).norm() <= 1e-12 * m.norm());
        let boundary = preset.b.as_constant().is_some_and(|m| (m - maxwell_boundary()).norm() <= 1e-12);
        if same && boundary {
            preset.expected_power = 1.0;
            preset.closed_forms = Some(ClosedForms::Maxwell { eps, mu_perm });
            preset.worst_directions = maxwell_worst_directions(eps, mu_perm);
        }
    }
    preset
}

/// Registered non-matrix symbols.
pub fn custom_symbol_by_tag(tag: &str) -> Option<Arc<dyn CustomSymbol>> {
    match tag {
        WAVE_TAG => Some(Arc::new(WaveSymbol)),
        _ => None,
    }
}

/// Registered frequency-dependent boundary operators.
pub fn boundary_symbol_by_tag(tag: &str, params: &[f64]) -> Result<Arc<dyn BoundarySymbol>> {
    match tag {
        OBLIQUE_TAG => {
            if params.iter().all(|b| *b == 0.0) {
                return Err(Error::ZeroVector);
            }
            Ok(Arc::new(ObliqueBoundary { b: params.to_vec() }))
        }
        _ => Err(Error::InvalidInput(format!("unknown boundary symbol '{tag}'"))),
    }
}

fn wave_system(d: usize) -> Result<HyperbolicSystem> {
    if d < 2 {
        return Err(Error::InvalidInput("the wave reduction needs d >= 2".into()));
    }
    HyperbolicSystem::custom(format!("wave_d{d}"), d, CMat::identity(2, 2), Arc::new(WaveSymbol))
}

fn glancing_directions(d: usize) -> Vec<Vec<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for (tau, eta) in [(s, s), (s, -s), (-s, s), (-s, -s)] {
        let mut v = vec![0.0; d];
        v[0] = tau;
        v[1] = eta;
        out.push(v);
    }
    out
}

pub fn wave_neumann(d: usize) -> Result<Preset> {
    Ok(Preset {
        name: "wave_neumann".into(),
        system: wave_system(d)?,
        b: BoundaryOperator::Constant(from_real(1, 2, &[1.0, 0.0])),
        expected_power: 0.5,
        closed_forms: Some(ClosedForms::Wave),
        worst_directions: glancing_directions(d),
    })
}

/// Unit `(tau, eta)` with `(b.eta)^2 = tau^2 - |eta|^2`, `b.eta < 0`, `tau > 0`.
pub fn oblique_worst_direction(b: &[f64]) -> Vec<f64> {
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tau = (1.0 + nb * nb).sqrt();
    let mut v = vec![tau];
    v.extend(b.iter().map(|x| -x / nb));
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Hemisphere member of the optimality sequence at the given `gamma`.
pub fn oblique_sequence_frequency(b: &[f64], gamma: f64) -> Result<Frequency> {
    Frequency::on_hemisphere(&oblique_worst_direction(b), gamma)
}

/// `Bz = sqrt(|eta|^2 - (tau - i gamma)^2) + i b.eta` on the hemisphere.
pub fn oblique_bz(b: &[f64], freq: &Frequency) -> C64 {
    let beta: f64 = b.iter().zip(&freq.eta).map(|(x, e)| x * e).sum();
    principal_sqrt(wave_q(freq)) + I * beta
}

pub fn wave_oblique(d: usize, b: &[f64]) -> Result<Preset> {
    if b.len() != d.saturating_sub(1) {
        return Err(Error::InvalidInput(format!("b must have length d - 1 = {}", d.saturating_sub(1))));
    }
    let op = boundary_symbol_by_tag(OBLIQUE_TAG, b)?;
    let mut worst = glancing_directions(d);
    worst.push(oblique_worst_direction(b));
    Ok(Preset {
        name: "wave_oblique".into(),
        system: wave_system(d)?,
        b: BoundaryOperator::Symbol(op),
        expected_power: 1.0,
        closed_forms: Some(ClosedForms::Wave),
        worst_directions: worst,
    })
}

/// Matrix of `v -> a x v`.
pub fn cross_matrix(a: [f64; 3]) -> [[f64; 3]; 3] {
    [[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]]
}

/// Coefficient matrices of `eps E_t - curl H`, `mu H_t + curl E`.
pub fn maxwell_matrices(eps: f64, mu_perm: f64) -> Vec<CMat> {
    let mut a = vec![linalg::diag_real(&[eps, eps, eps, mu_perm, mu_perm, mu_perm])];
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        let k = cross_matrix(e);
        let mut m = CMat::zeros(6, 6);
        for r in 0..3 {
            for col in 0..3 {
                m[(r, col + 3)] = re(-k[r][col]);
                m[(r + 3, col)] = re(k[r][col]);
            }
        }
        a.push(m);
    }
    a
}

/// Rows of `nu x E` with `nu = (0, 0, -1)`: `(E_2, -E_1, 0)`.
pub fn maxwell_boundary() -> CMat {
    from_real(2, 6, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
}

/// Stable eigenvalue `xi = -sqrt(|eta|^2 - eps mu (tau - i gamma)^2)`.
pub fn maxwell_xi(freq: &Frequency, eps: f64, mu_perm: f64) -> C64 {
    let z = freq.complex_tau();
    -principal_sqrt(re(freq.eta_norm_sqr()) - z * z * (eps * mu_perm))
}

/// Real unit vector orthogonal to `Re zeta` and the normal.
pub fn zeta_perp(eta: &[f64]) -> [f64; 3] {
    let n = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
    if n == 0.0 {
        [1.0, 0.0, 0.0]
    } else {
        [-eta[1] / n, eta[0] / n, 0.0]
    }
}

fn cross(a: &[C64; 3], b: &[C64; 3]) -> [C64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// The orthogonal stable basis `w_1 = (mu z zp, -zeta x zp)`,
/// `w_2 = (zeta x zp, eps z zp)` with `z = tau - i gamma`.
pub fn maxwell_basis(freq: &Frequency, eps: f64, mu_perm: f64) -> (linalg::CVec, linalg::CVec) {
    let xi = maxwell_xi(freq, eps, mu_perm);
    let zeta = [re(freq.eta[0]), re(freq.eta[1]), -I * xi];
    let p = zeta_perp(&freq.eta);
    let zp = [re(p[0]), re(p[1]), re(p[2])];
    let zx = cross(&zeta, &zp);
    let z = freq.complex_tau();
    let mut w1 = linalg::CVec::zeros(6);
    let mut w2 = linalg::CVec::zeros(6);
    for k in 0..3 {
        w1[k] = zp[k] * z * mu_perm;
        w1[k + 3] = -zx[k];
        w2[k] = zx[k];
        w2[k + 3] = zp[k] * z * eps;
    }
    (w1, w2)
}

fn maxwell_worst_directions(eps: f64, mu_perm: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let k = (eps * mu_perm).sqrt();
    let n = (1.0 + k * k).sqrt();
    for phi in [0.0, 0.7, 2.1, 3.9] {
        let (s, co) = f64::sin_cos(phi);
        for sign in [1.0, -1.0] {
            // eps mu tau^2 = |eta|^2
            out.push(vec![sign / n, k * co / n, k * s / n]);
        }
        out.push(vec![0.0, co, s]);
    }
    out
}

pub fn maxwell(eps: f64, mu_perm: f64) -> Result<Preset> {
    if !(eps > 0.0 && mu_perm > 0.0) {
        return Err(Error::InvalidInput("eps and mu_perm must be positive".into()));
    }
    let tol = Tolerances::default();
    let system = HyperbolicSystem::linear("maxwell", maxwell_matrices(eps, mu_perm), &tol)?;
    Ok(Preset {
        name: "maxwell".into(),
        system,
        b: BoundaryOperator::constant(maxwell_boundary(), &tol)?,
        expected_power: 1.0,
        closed_forms: Some(ClosedForms::Maxwell { eps, mu_perm }),
        worst_directions: maxwell_worst_directions(eps, mu_perm),
    })
}

/// `d = 1`, `A^1 = diag(1, -1)`, `B = [1, r]`.
pub fn symmetric_control(r: f64) -> Result<Preset> {
    if !(r.abs() < 1.0) {
        return Err(Error::InvalidInput(format!("symmetric control needs |r| < 1, got {r}")));
    }
    let tol = Tolerances::default();
    let system = HyperbolicSystem::linear(
        "symmetric_control",
        vec![CMat::identity(2, 2), from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])],
        &tol,
    )?;
    Ok(Preset {
        name: "symmetric_control".into(),
        system,
        b: BoundaryOperator::constant(from_real(1, 2, &[1.0, r]), &tol)?,
        expected_power: 0.0,
        closed_forms: Some(ClosedForms::Diagonal),
        worst_directions: Vec::new(),
    })
}

/// Linear acoustics `p_t + div v = 0`, `v_t + grad p = 0` in `d = 2` with
/// the impedance condition `p + v_2 = g`, which satisfies the uniform
/// condition. (Pressure data alone does not: its ratio decays like `|tau| + gamma`.)
pub fn acoustic_control() -> Result<Preset> {
    let tol = Tolerances::default();
    let a = vec![
        CMat::identity(3, 3),
        from_real(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        from_real(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
    ];
    let system = HyperbolicSystem::linear("acoustic_control", a, &tol)?;
    Ok(Preset {
        name: "acoustic_control".into(),
        system,
        b: BoundaryOperator::constant(from_real(1, 3, &[1.0, 0.0, 1.0]), &tol)?,
        expected_power: 0.0,
        closed_forms: None,
        worst_directions: glancing_directions(2),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    /// `|lambda_computed - lambda_closed| / max(1, |lambda_closed|)`, worst over stable eigenvalues.
    pub eigenvalue_error: f64,
    /// Largest principal angle between the Schur basis and the closed form.
    pub basis_angle: f64,
    /// Largest principal angle between `range(Pi)` and the closed form.
    pub projector_angle: f64,
}

/// Compares the numerical eigenstructure with the closed forms at `freq`.
pub fn closed_form_crosscheck(preset: &Preset, freq: &Frequency, tol: &Tolerances) -> Result<CrossCheck> {
    let cf = preset
        .closed_forms
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("preset {} has no closed forms", preset.name)))?;
    let ad = preset.system.ad();
    let g = build_g(&preset.system, freq);
    let decomp = pencil_eigen(ad, &g, tol)?;
    let want = cf.stable_eigenvalue(freq);
    let eigenvalue_error = decomp
        .stable_eigenvalues()
        .iter()
        .map(|z| (z - want).norm() / want.norm().max(1.0))
        .fold(0.0, f64::max);
    let basis = linalg::orthonormal_basis(&cf.stable_basis(freq), 1e-12);
    let basis_angle = linalg::max_principal_angle(&decomp.stable_basis, &basis);
    let contour = contour_from_spectrum(&decomp, tol)?;
    let p = spectral_projector(ad, &g, &contour, tol)?;
    let range = linalg::orthonormal_basis(&p, 1e-8);
    let projector_angle = linalg::max_principal_angle(&range, &basis);
    Ok(CrossCheck {
        eigenvalue_error,
        basis_angle,
        projector_angle,
    })
}

/// `|B(a w_1 + b w_2)|^2` and `|A^3(a w_1 + b w_2)|^2` from the closed
/// expressions, for comparison with direct evaluation.
pub fn maxwell_chain(freq: &Frequency, eps: f64, mu_perm: f64, a: C64, b: C64) -> (f64, f64) {
    let xi2 = maxwell_xi(freq, eps, mu_perm).norm_sqr();
    let t2 = freq.tau * freq.tau + freq.gamma * freq.gamma;
    let bn = a.norm_sqr() * mu_perm * mu_perm * t2 + b.norm_sqr() * xi2;
    let an = t2 * (eps * eps * b.norm_sqr() + mu_perm * mu_perm * a.norm_sqr()) + (a.norm_sqr() + b.norm_sqr()) * xi2;
    (bn, an)
}

/// Identity `||eta|^2 - (tau - i gamma)^2|^2` in expanded form.
pub fn eq_wave_expanded(freq: &Frequency) -> f64 {
    let (t2, e2, g2) = (freq.tau * freq.tau, freq.eta_norm_sqr(), freq.gamma * freq.gamma);
    (t2 - e2) * (t2 - e2) + g2 * g2 + 2.0 * g2 * e2 + 2.0 * t2 * g2
}

/// Boundary datum for the two-dimensional wave presets concentrated at the
/// glancing point `tau = eta = 1`: `g_hat(tau, 1) = |tau - 1|^{-a/2} e^{-(tau-1)^2/(2 w^2)}`
/// with `w = 1/4`, `f = 0`, sampled on a geometric grid in `|tau - 1|`
/// from `1e-9` to `3/4` on both sides.
///
/// For `0 < a < 1` the datum is square integrable and the `s = 0` estimate
/// ratio grows like `gamma^{a-1}` as `gamma -> 0`, while the `s = 1/2` ratio
/// only drifts like `gamma^{1-a}`.
pub fn glancing_datum(a: f64, per_side: usize) -> Vec<SpectralDatum> {
    let (lo, hi): (f64, f64) = (1e-9, 0.75);
    let side: Vec<f64> = (0..per_side)
        .map(|i| lo * (hi / lo).powf(i as f64 / (per_side.max(2) - 1) as f64))
        .collect();
    let u: Vec<f64> = side.iter().rev().map(|v| -v).chain(side.iter().copied()).collect();
    (0..u.len())
        .map(|i| {
            let left = if i > 0 { u[i - 1] } else { u[i] };
            let right = if i + 1 < u.len() { u[i + 1] } else { u[i] };
            let amp = u[i].abs().powf(-a / 2.0) * (-0.5 * (u[i] / 0.25).powi(2)).exp();
            SpectralDatum {
                tangential: vec![1.0 + u[i], 1.0],
                weight: 0.5 * (right - left),
                f_hat: None,
                g_hat: CVec::from_vec(vec![re(amp)]),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn wave_symbol_matches_hemisphere_display() {
        let f = Frequency::new(0.3, vec![0.4], (1.0f64 - 0.25).sqrt()).unwrap();
        let g = WaveSymbol.symbol(&f);
        assert!((g[(0, 1)] - wave_q(&f)).norm() < 1e-15);
        assert!((g[(1, 0)] - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn wave_eigen_at_pole() {
        let p = wave_neumann(2).unwrap();
        let f = Frequency::new(0.0, vec![0.0], 1.0).unwrap();
        assert!((ClosedForms::Wave.stable_eigenvalue(&f) - re(-1.0)).norm() < 1e-15);
        let cc = closed_form_crosscheck(&p, &f, &tol()).unwrap();
        assert!(cc.eigenvalue_error < 1e-12 && cc.basis_angle < 1e-10);
    }

    #[test]
    fn maxwell_matrices_hermitian_and_a3_kernel() {
        let a = maxwell_matrices(2.0, 0.5);
        for m in &a {
            assert!(linalg::is_hermitian(m, 1e-15).0);
        }
        let k = linalg::null_space(&a[3], 1e-12);
        assert_eq!(k.ncols(), 2);
        let b = maxwell_boundary();
        assert!((b * k).norm() < 1e-14);
    }

    #[test]
    fn maxwell_closed_form_basis() {
        let p = maxwell(1.0, 1.0).unwrap();
        let f = Frequency::new(0.5, vec![0.3, -0.6], 0.2).unwrap().normalized();
        let cc = closed_form_crosscheck(&p, &f, &tol()).unwrap();
        assert!(cc.eigenvalue_error < 1e-10, "{cc:?}");
        assert!(cc.basis_angle < 1e-8 && cc.projector_angle < 1e-8, "{cc:?}");
        let (w1, w2) = maxwell_basis(&f, 1.0, 1.0);
        assert!(w1.dotc(&w2).norm() < 1e-14);
    }

    #[test]
    fn oblique_rejects_zero_b() {
        assert!(matches!(wave_oblique(2, &[0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn oblique_direction_on_cone() {
        let b = [1.0, -2.0];
        let v = oblique_worst_direction(&b);
        let beta = b[0] * v[1] + b[1] * v[2];
        assert!(beta < 0.0 && v[0] > 0.0);
        assert!((beta * beta - (v[0] * v[0] - v[1] * v[1] - v[2] * v[2])).abs() < 1e-15);
    }

    #[test]
    fn oblique_row_reproduces_bz() {
        let p = wave_oblique(2, &[1.0]).unwrap();
        let f = Frequency::new(0.2, vec![-0.5], 0.3).unwrap().normalized();
        let z = ClosedForms::Wave.stable_basis(&f);
        let bz = (p.b.matrix_at(&f) * z)[(0, 0)];
        assert!((bz - oblique_bz(&[1.0], &f)).norm() < 1e-14);
    }
}
