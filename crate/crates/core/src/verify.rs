//! Property suites: algebraic identities and inequalities from the worked
//! examples, projector and resolvent checks, and estimate sweeps.
//!
//! Every suite is deterministic for a fixed seed and returns a
//! [`PropertyReport`] rather than failing, so callers can tabulate margins.

use std::fmt;

use rand::Rng;

use crate::algebra::{contour_from_spectrum, pencil_eigen, SpectralProjection};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::halfspace::{
    weighted_estimate_spectral, solve, solve_frequency, verify_weighted_estimate, verify_energy_bound, EstimateMode,
    FrequencyContext, FrequencyProblem, SolverOptions, SpaceTimeGrid, XGrid,
};
use crate::hyperbolic::{build_g, check_resolvent_bound, classify, Frequency, HyperbolicSystem};
use crate::io::GridField;
use crate::linalg::{self, principal_sqrt, C64, CMat, CVec};
use crate::lopatinskii::BoundaryOperator;
use crate::models::{self, ClosedForms, Preset};
use crate::parallel;
use crate::sampling::{random_unit, rng_for, standard_normal};

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    pub violations: usize,
    /// Suite-specific headline number (smallest slack or largest error).
    pub margin: f64,
    pub detail: String,
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: samples={} violations={} margin={:.6e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.samples,
            self.violations,
            self.margin,
            self.detail
        )
    }
}

/// Hemisphere point from a random unit vector of length `d + 1`, with
/// `gamma` kept at least `floor`.
fn hemisphere_sample(rng: &mut impl Rng, d: usize, floor: f64) -> Frequency {
    let mut v = random_unit(rng, d + 1);
    v[d] = v[d].abs().max(floor);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v: Vec<f64> = v.iter().map(|x| x / n).collect();
    Frequency::new(v[0], v[1..d].to_vec(), v[d]).expect("gamma > 0")
}

fn random_complex(rng: &mut impl Rng) -> C64 {
    C64::new(standard_normal(rng), standard_normal(rng))
}

/// Splits `samples` into independent chunks; returns per-chunk results.
fn chunked<T: Send>(samples: usize, f: impl Fn(usize, std::ops::Range<usize>) -> T + Sync + Send) -> Vec<T> {
    const CHUNK: usize = 1000;
    let chunks = samples.div_ceil(CHUNK);
    parallel::map_indexed(chunks, |c| f(c, c * CHUNK..((c + 1) * CHUNK).min(samples)))
}

/// The wave identity `||eta|^2 - (tau - i gamma)^2|^2 = (tau^2 - |eta|^2)^2 + gamma^4 + 2 gamma^2 |eta|^2 + 2 tau^2 gamma^2`
/// to `1e-12` relative and the bound by `gamma^2 (gamma^2 + 2 tau^2 + 2 |eta|^2) >= gamma^2`
/// on hemisphere samples.
pub fn wave_identity(d: usize, samples: usize, seed: u64) -> PropertyReport {
    let parts = chunked(samples, |c, range| {
        let mut rng = rng_for(seed, c as u64);
        let mut worst_identity = 0.0_f64;
        let mut min_slack = f64::INFINITY;
        let mut violations = 0;
        for _ in range {
            let f = hemisphere_sample(&mut rng, d, 0.0);
            let lhs = models::wave_q(&f).norm_sqr();
            let expanded = models::eq_wave_expanded(&f);
            let rel = (lhs - expanded).abs() / lhs.max(f64::MIN_POSITIVE);
            let g2 = f.gamma * f.gamma;
            let bound = g2 * (g2 + 2.0 * f.tau * f.tau + 2.0 * f.eta_norm_sqr());
            let slack = (lhs - bound) / bound;
            if rel > 1e-12 || slack < -1e-12 || bound < g2 * (1.0 - 1e-12) {
                violations += 1;
            }
            worst_identity = worst_identity.max(rel);
            min_slack = min_slack.min(slack);
        }
        (worst_identity, min_slack, violations)
    });
    let (ident, slack, violations) = parts.iter().fold((0.0_f64, f64::INFINITY, 0), |acc, p| {
        (acc.0.max(p.0), acc.1.min(p.1), acc.2 + p.2)
    });
    PropertyReport {
        name: "wave_identity".into(),
        passed: violations == 0,
        samples,
        violations,
        margin: slack,
        detail: format!("identity_rel_err={ident:.3e} min_relative_slack={slack:.3e}"),
    }
}

/// `Re sqrt(c^2 - (a - d i)^2) >= d` for `d >= 0` on the principal branch.
/// A violation needs a shortfall beyond `8 eps (|a| + |c| + d)` roundoff.
pub fn re_sqrt(samples: usize, seed: u64) -> PropertyReport {
    let parts = chunked(samples, |c, range| {
        let mut rng = rng_for(seed, c as u64);
        let mut violations = 0;
        let mut min_slack = f64::INFINITY;
        for _ in range {
            let scale = 10f64.powf(rng.random_range(-3.0..3.0));
            let a = scale * rng.random_range(-1.0..1.0);
            let cc = scale * rng.random_range(-1.0..1.0);
            let d = scale * rng.random_range(0.0..1.0);
            let z = C64::new(cc * cc, 0.0) - C64::new(a, -d) * C64::new(a, -d);
            let r = principal_sqrt(z).re;
            let size = a.abs() + cc.abs() + d;
            let slack = (r - d) / size.max(f64::MIN_POSITIVE);
            if r < d - 8.0 * f64::EPSILON * size {
                violations += 1;
            }
            min_slack = min_slack.min(slack);
        }
        (violations, min_slack)
    });
    let violations: usize = parts.iter().map(|p| p.0).sum();
    let slack = parts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    PropertyReport {
        name: "re_sqrt".into(),
        passed: violations == 0,
        samples,
        violations,
        margin: slack,
        detail: format!("min_relative_slack={slack:.3e}"),
    }
}

/// Squared constant in `|B w| >= c gamma |A^3 w|` on `E^s` for `eps = mu = 1`.
///
/// Both quadratic forms are diagonal in `(|alpha|^2, |beta|^2)`, so the ratio
/// is at least the smaller of `t^2 / (gamma^2 (t^2 + |xi|^2))` and
/// `|xi|^2 / (gamma^2 (t^2 + |xi|^2))` with `t^2 = tau^2 + gamma^2`. On the
/// hemisphere `gamma^2 <= t^2 <= 1` and `gamma^2 <= |xi|^2 <= 1`, so both are
/// at least `1/2`.
pub const MAXWELL_CHAIN_CONSTANT_SQR: f64 = 0.5;

/// Reproduces `|B(a w_1 + b w_2)|^2 = |a|^2 mu^2 (tau^2 + gamma^2) + |b|^2 |xi|^2`
/// by direct evaluation to `1e-10` relative, then checks
/// `|B w|^2 >= c^2 gamma^2 |A^3 w|^2` (with the constant above when
/// `eps = mu = 1`, otherwise only positivity is required).
pub fn maxwell_chain(eps: f64, mu_perm: f64, samples: usize, seed: u64) -> Result<PropertyReport> {
    let preset = models::maxwell(eps, mu_perm)?;
    let b = preset.b.as_constant().expect("constant Maxwell boundary").clone();
    let ad = preset.system.ad().clone();
    let unit = eps == 1.0 && mu_perm == 1.0;
    let c2 = if unit { MAXWELL_CHAIN_CONSTANT_SQR } else { 0.0 };
    let parts = chunked(samples, |c, range| {
        let mut rng = rng_for(seed, c as u64);
        let mut worst = 0.0_f64;
        let mut min_ratio = f64::INFINITY;
        let mut violations = 0;
        for _ in range {
            let f = hemisphere_sample(&mut rng, 3, 1e-6);
            let (mut al, mut be) = (random_complex(&mut rng), random_complex(&mut rng));
            let n = (al.norm_sqr() + be.norm_sqr()).sqrt();
            al /= n;
            be /= n;
            let (w1, w2) = models::maxwell_basis(&f, eps, mu_perm);
            let w = &w1 * al + &w2 * be;
            let bw = (&b * &w).norm_squared();
            let aw = (&ad * &w).norm_squared();
            let (bc, ac) = models::maxwell_chain(&f, eps, mu_perm, al, be);
            let err = ((bw - bc).abs() / bc.max(f64::MIN_POSITIVE)).max((aw - ac).abs() / ac.max(f64::MIN_POSITIVE));
            let ratio = bw / (f.gamma * f.gamma * aw);
            if err > 1e-10 || ratio < c2 * (1.0 - 1e-12) || ratio <= 0.0 {
                violations += 1;
            }
            worst = worst.max(err);
            min_ratio = min_ratio.min(ratio);
        }
        (worst, min_ratio, violations)
    });
    let worst = parts.iter().map(|p| p.0).fold(0.0, f64::max);
    let min_ratio = parts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let violations: usize = parts.iter().map(|p| p.2).sum();
    Ok(PropertyReport {
        name: "maxwell_chain".into(),
        passed: violations == 0,
        samples,
        violations,
        margin: min_ratio - c2,
        detail: format!("chain_rel_err={worst:.3e} inf_|Bw|^2/(gamma^2|A3w|^2)={min_ratio:.6e} required={c2}"),
    })
}

/// Sup of `gamma |(i xi_d A^d - G)^{-1}|` at `samples` and `2 samples`;
/// passes when finite and the two differ by less than 10%.
pub fn resolvent(system: &HyperbolicSystem, samples: usize, seed: u64, tol: &Tolerances) -> Result<PropertyReport> {
    let gammas = [1e-2, 1e-1, 1.0, 10.0];
    let a = check_resolvent_bound(system, samples, &gammas, seed, tol)?;
    let b = check_resolvent_bound(system, 2 * samples, &gammas, seed, tol)?;
    let change = (b.value - a.value).abs() / a.value;
    Ok(PropertyReport {
        name: "resolvent".into(),
        passed: a.value.is_finite() && b.value.is_finite() && change < 0.1,
        samples: 3 * samples,
        violations: usize::from(!(change < 0.1)),
        margin: b.value,
        detail: format!(
            "sup={:.12e} sup_doubled={:.12e} change={change:.3e} worst_tau={:.6e} worst_xi={:?} worst_gamma={:.3e}",
            a.value, b.value, b.tau, b.xi, b.gamma
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorCheck {
    pub residual: f64,
    pub rank_ok: bool,
    pub schur_angle: f64,
}

fn projector_check(ad: &CMat, g: &CMat, tol: &Tolerances) -> Result<(ProjectorCheck, CMat)> {
    let decomp = pencil_eigen(ad, g, tol)?;
    let contour = contour_from_spectrum(&decomp, tol)?;
    let proj = SpectralProjection::new(ad, g, &contour, tol)?;
    let p = &proj.projector;
    let range = linalg::orthonormal_basis(p, 1e-8);
    let residual = (p * p - p).norm() / p.norm().max(1.0);
    Ok((
        ProjectorCheck {
            residual,
            rank_ok: range.ncols() == decomp.mu,
            schur_angle: linalg::max_principal_angle(&range, &decomp.stable_basis),
        },
        range,
    ))
}

/// Random regular pencil `(A, G) = (Y D Z, Y diag(Lambda, I) Z)` with `D`
/// zero on the last `infinite` entries. Eigenvalues keep `|Re| >= 0.05`
/// and pairwise distance `>= 0.05`, so the stable gap is at least `1e-2`.
/// Returns the pencil and the exact stable subspace `Z^{-1} [e_k]`.
pub fn random_pencil(seed: u64, index: u64) -> (CMat, CMat, CMat) {
    let mut rng = rng_for(seed, index);
    let n = rng.random_range(2..=6usize);
    let infinite = rng.random_range(0..n.min(3));
    let finite = n - infinite;
    let lambdas = loop {
        let mut lambdas: Vec<C64> = Vec::with_capacity(finite);
        while lambdas.len() < finite {
            let sign = if lambdas.is_empty() {
                -1.0
            } else if lambdas.len() == 1 {
                1.0
            } else if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            };
            let z = C64::new(sign * rng.random_range(0.05..3.0), rng.random_range(-3.0..3.0));
            if lambdas.iter().all(|w| (w - z).norm() >= 0.05) {
                lambdas.push(z);
            }
        }
        if circle_separates(&lambdas, 0.05) {
            break lambdas;
        }
    };
    let well_conditioned = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let m = CMat::from_fn(n, n, |_, _| random_complex(rng)) * C64::new(0.5, 0.0) + CMat::identity(n, n);
        if linalg::condition_number(&m) < 50.0 {
            return m;
        }
    };
    let y = well_conditioned(&mut rng);
    let z = well_conditioned(&mut rng);
    let mut dm = CMat::zeros(n, n);
    let mut gm = CMat::zeros(n, n);
    for k in 0..n {
        if k < finite {
            dm[(k, k)] = C64::new(1.0, 0.0);
            gm[(k, k)] = lambdas[k];
        } else {
            gm[(k, k)] = C64::new(1.0, 0.0);
        }
    }
    let a = &y * &dm * &z;
    let g = &y * &gm * &z;
    let zinv = linalg::inverse_fast(&z).expect("well conditioned");
    let stable: Vec<usize> = (0..finite).filter(|&k| lambdas[k].re < 0.0).collect();
    let mut basis = CMat::zeros(n, stable.len());
    for (c, &k) in stable.iter().enumerate() {
        basis.set_column(c, &zinv.column(k));
    }
    (a, g, linalg::orthonormal_basis(&basis, 1e-12))
}

/// Whether a circle about the stable centroid separates the stable points
/// from the rest with relative clearance at least `margin`. Pencils that fail
/// this are outside the reach of the circular contour and are redrawn.
fn circle_separates(lambdas: &[C64], margin: f64) -> bool {
    let stable: Vec<C64> = lambdas.iter().copied().filter(|z| z.re < 0.0).collect();
    let centre = stable.iter().sum::<C64>() / stable.len() as f64;
    let inner = stable.iter().map(|z| (z - centre).norm()).fold(0.0_f64, f64::max);
    let outer = lambdas
        .iter()
        .filter(|z| z.re > 0.0)
        .map(|z| (z - centre).norm())
        .fold(f64::INFINITY, f64::min);
    outer - inner >= margin * outer.max(1.0)
}

/// Idempotency `<= 1e-10`, rank `mu`, and principal angles `<= 1e-8`
/// between the contour projector, the ordered Schur basis and the exact
/// stable subspace, on `count` random pencils.
pub fn projector_random(count: usize, seed: u64, tol: &Tolerances) -> PropertyReport {
    let results = parallel::map_indexed(count, |k| -> Result<(ProjectorCheck, f64)> {
        let (a, g, exact) = random_pencil(seed, k as u64);
        let (check, range) = projector_check(&a, &g, tol)?;
        Ok((check, linalg::max_principal_angle(&range, &exact)))
    });
    summarize_projector("projector_random", results)
}

fn summarize_projector(name: &str, results: Vec<Result<(ProjectorCheck, f64)>>) -> PropertyReport {
    let samples = results.len();
    let mut violations = 0;
    let (mut res, mut ang, mut errors) = (0.0_f64, 0.0_f64, 0);
    for r in results {
        match r {
            Ok((c, exact_angle)) => {
                let angle = c.schur_angle.max(exact_angle);
                if c.residual > 1e-10 || !c.rank_ok || angle > 1e-8 {
                    violations += 1;
                }
                res = res.max(c.residual);
                ang = ang.max(angle);
            }
            Err(_) => {
                violations += 1;
                errors += 1;
            }
        }
    }
    PropertyReport {
        name: name.into(),
        passed: violations == 0,
        samples,
        violations,
        margin: ang,
        detail: format!("max_idempotency={res:.3e} max_angle={ang:.3e} errors={errors}"),
    }
}

/// The projector checks at hemisphere frequencies of a system, with the
/// closed-form stable basis as a further oracle when available.
pub fn projector_system(
    system: &HyperbolicSystem,
    closed: Option<&ClosedForms>,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> PropertyReport {
    let results = parallel::map_indexed(samples, |k| -> Result<(ProjectorCheck, f64)> {
        let mut rng = rng_for(seed, k as u64);
        let f = hemisphere_sample(&mut rng, system.d, 0.05);
        let g = build_g(system, &f);
        let (check, range) = projector_check(system.ad(), &g, tol)?;
        let exact = closed
            .map(|c| linalg::max_principal_angle(&range, &linalg::orthonormal_basis(&c.stable_basis(&f), 1e-12)))
            .unwrap_or(0.0);
        Ok((check, exact))
    });
    summarize_projector("projector", results)
}

/// Closed forms against the numerical eigenstructure at hemisphere samples:
/// eigenvalue error `<= 1e-10`, principal angles `<= 1e-8`.
pub fn crosscheck(preset: &Preset, samples: usize, seed: u64, tol: &Tolerances) -> PropertyReport {
    let results = parallel::map_indexed(samples, |k| {
        let mut rng = rng_for(seed, k as u64);
        let f = hemisphere_sample(&mut rng, preset.system.d, 1e-3);
        models::closed_form_crosscheck(preset, &f, tol)
    });
    let mut violations = 0;
    let (mut ev, mut ang) = (0.0_f64, 0.0_f64);
    for r in &results {
        match r {
            Ok(c) => {
                let a = c.basis_angle.max(c.projector_angle);
                if c.eigenvalue_error > 1e-10 || a > 1e-8 {
                    violations += 1;
                }
                ev = ev.max(c.eigenvalue_error);
                ang = ang.max(a);
            }
            Err(_) => violations += 1,
        }
    }
    PropertyReport {
        name: "crosscheck".into(),
        passed: violations == 0,
        samples,
        violations,
        margin: ang,
        detail: format!("max_eigenvalue_err={ev:.3e} max_angle={ang:.3e}"),
    }
}

/// Largest energy-bound ratios over random frequencies with `gamma` in
/// `[1, 1e3]`, a Gaussian forcing profile and random boundary data.
pub fn energy_bound_sup(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let results = parallel::map_indexed(samples, |k| -> Result<(f64, f64)> {
        let mut rng = rng_for(seed, k as u64);
        let gamma = 10f64.powf(rng.random_range(0.0..3.0));
        let dir = random_unit(&mut rng, system.d);
        let scale = gamma * 10f64.powf(rng.random_range(-1.0..1.0));
        let freq = Frequency::new(scale * dir[0], dir[1..].iter().map(|x| x * scale).collect(), gamma)?;
        let ctx = FrequencyContext::new(system, b, &freq, tol)?;
        let grid = XGrid::default_for(&ctx.decomp);
        let (x0, w) = (grid.extent() / 8.0, grid.extent() / 32.0);
        let grid = grid.refined(w / 16.0);
        let v = CVec::from_fn(system.n, |_, _| random_complex(&mut rng));
        let f_hat = CMat::from_fn(system.n, grid.n, |c, j| v[c] * (-0.5 * ((grid.x(j) - x0) / w).powi(2)).exp());
        let g_hat = CVec::from_fn(b.mu(), |_, _| random_complex(&mut rng));
        let problem = FrequencyProblem {
            freq,
            grid,
            f_hat,
            g_hat,
        };
        let sol = solve_frequency(system, b, &problem, &SolverOptions::default(), tol)?;
        let r = verify_energy_bound(system, &sol, &problem)?;
        Ok((r.interior_ratio, r.trace_ratio))
    });
    let mut out = (0.0_f64, 0.0_f64);
    for r in results {
        let (i, t) = r?;
        out = (out.0.max(i), out.1.max(t));
    }
    Ok(out)
}

/// Energy bound with its explicit constants: every sample has
/// `interior_ratio <= 1` and `trace_ratio <= 2` up to a `1e-6` quadrature
/// allowance, uniformly over `gamma` in `[1, 1e3]`.
pub fn energy_bound(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> PropertyReport {
    match energy_bound_sup(system, b, samples, seed, tol) {
        Ok((interior, trace)) => {
            let checks = [interior <= 1.0 + 1e-6, trace <= 2.0 * (1.0 + 1e-6)];
            let violations = checks.iter().filter(|c| !**c).count();
            PropertyReport {
                name: "energy_bound".into(),
                passed: violations == 0,
                samples,
                violations,
                margin: (1.0 - interior).min(2.0 - trace),
                detail: format!("sup_interior={interior:.6e} sup_trace={trace:.6e}"),
            }
        }
        Err(e) => failed("energy_bound", &e),
    }
}

fn failed(name: &str, e: &Error) -> PropertyReport {
    PropertyReport {
        name: name.into(),
        passed: false,
        samples: 0,
        violations: 1,
        margin: f64::NAN,
        detail: format!("error: {e}"),
    }
}

/// `|Bz_n| / gamma_n^{0.9}` along the optimality sequence at `gamma_n = 2^{-n}`.
pub fn oblique_sequence_ratios(b: &[f64], n_max: u32) -> Result<Vec<(f64, f64)>> {
    (4..=n_max)
        .map(|n| {
            let gamma = 2f64.powi(-(n as i32));
            let f = models::oblique_sequence_frequency(b, gamma)?;
            Ok((gamma, models::oblique_bz(b, &f).norm() / gamma.powf(0.9)))
        })
        .collect()
}

/// The ratios decrease monotonically over `2^{-4} .. 2^{-16}` and drop below
/// `0.1` by `2^{-16}`.
///
/// Along the sequence `Bz_n = c gamma_n + O(gamma_n^2)` with
/// `c = tau_n / |b . eta_n| >= 1`, so the ratio behaves like `c gamma^{0.1}`
/// and only reaches `0.1` near `gamma = 1e-10`. The `0.1` threshold is
/// therefore out of reach on this range and the report says so.
pub fn oblique_sequence(b: &[f64]) -> PropertyReport {
    match oblique_sequence_ratios(b, 16) {
        Ok(r) => {
            let increases = r.windows(2).filter(|w| w[1].1 >= w[0].1).count();
            let last = r.last().map_or(f64::NAN, |v| v.1);
            let violations = increases + usize::from(!(last < 0.1));
            PropertyReport {
                name: "oblique_sequence".into(),
                passed: violations == 0,
                samples: r.len(),
                violations,
                margin: last,
                detail: format!(
                    "ratio_at_2^-16={last:.6e} non_decreasing_steps={increases} asymptote_c={:.6e}",
                    last / 2f64.powi(-16).powf(0.1)
                ),
            }
        }
        Err(e) => failed("oblique_sequence", &e),
    }
}

/// Estimate ratios for the glancing datum at `gamma = 2^{-1}, .., 2^{-8}`.
pub fn glancing_sweep(preset: &Preset, s: f64, mode: EstimateMode, tol: &Tolerances) -> Result<Vec<(f64, f64)>> {
    let data = models::glancing_datum(0.9, 600);
    (1..=8)
        .map(|k| {
            let gamma = 2f64.powi(-k);
            let r = weighted_estimate_spectral(&preset.system, &preset.b, &data, gamma, s, mode, tol)?;
            Ok((gamma, r.ratio))
        })
        .collect()
}

/// Max over min of a sweep of ratios.
pub fn spread(values: &[(f64, f64)]) -> f64 {
    let max = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    max / min
}

/// Loss of derivatives for a two-dimensional wave preset: at its power the
/// ratio stays in a 3x band, at `s = power - 1/2` it grows by more than 10x
/// towards small `gamma`, and the shifted-norm mode stays in the band too.
pub fn loss_of_derivatives(preset: &Preset, tol: &Tolerances) -> PropertyReport {
    let s = preset.expected_power;
    let run = || -> Result<(Vec<(f64, f64)>, Vec<(f64, f64)>, Vec<(f64, f64)>)> {
        Ok((
            glancing_sweep(preset, s, EstimateMode::Standard, tol)?,
            glancing_sweep(preset, s - 0.5, EstimateMode::Standard, tol)?,
            glancing_sweep(preset, s, EstimateMode::Shifted, tol)?,
        ))
    };
    match run() {
        Ok((at, below, shifted)) => {
            let band = spread(&at);
            let growth = below.last().expect("sweep").1 / below[0].1;
            let shifted_band = spread(&shifted);
            let checks = [band <= 3.0, growth > 10.0, shifted_band <= 3.0];
            let violations = checks.iter().filter(|c| !**c).count();
            PropertyReport {
                name: "loss_of_derivatives".into(),
                passed: violations == 0,
                samples: 3 * at.len(),
                violations,
                margin: band,
                detail: format!(
                    "band_at_s={band:.4} growth_at_s-1/2={growth:.4} band_shifted={shifted_band:.4}"
                ),
            }
        }
        Err(e) => failed("loss_of_derivatives", &e),
    }
}

/// Space-time problem driven only by a boundary pulse: `f = 0`,
/// `g(t, y) = b_0 e^{-(t - t_c)^2 / (2 w^2)} prod Gaussian(y)`. Returns the
/// `s`-estimate ratio for each `gamma`, with the `x_d` grid scaled to the
/// decay length `1/gamma`.
pub fn boundary_pulse_ratios(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    gammas: &[f64],
    s: f64,
    tol: &Tolerances,
) -> Result<Vec<(f64, f64)>> {
    let (nt, dt, tc, w) = (256usize, 4.0 / 256.0, 1.0, 0.05);
    let ny = vec![32usize; system.d - 1];
    let dy = vec![0.25; system.d - 1];
    let mu = b.mu();
    gammas
        .iter()
        .map(|&gamma| {
            let x = XGrid::with_extent(40.0 / gamma, 1024)?;
            let grid = SpaceTimeGrid::new(nt, dt, ny.clone(), dy.clone(), x)?;
            let f = GridField::zeros(system.n, grid.interior_dims(), grid.interior_spacings(), 0.0);
            let mut g = GridField::zeros(mu, grid.tangential_dims(), grid.tangential_spacings(), 0.0);
            let per_t = g.points() / nt;
            for p in 0..g.points() {
                let t = grid.t(p / per_t);
                let mut amp = (-0.5 * ((t - tc) / w).powi(2)).exp();
                let mut rem = p % per_t;
                for a in (0..ny.len()).rev() {
                    let yj = (rem % ny[a]) as f64 * dy[a];
                    rem /= ny[a];
                    let period = ny[a] as f64 * dy[a];
                    amp *= (-0.5 * ((yj - period / 2.0) / (period / 16.0)).powi(2)).exp();
                }
                g.set(p, 0, C64::new(amp, 0.0));
            }
            let sol = solve(system, b, &grid, &f, &g, gamma, &SolverOptions::default(), tol)?;
            let r = verify_weighted_estimate(&sol, &f, &g, s, EstimateMode::Standard)?;
            Ok((gamma, r.ratio))
        })
        .collect()
}

/// Classification reports a symmetric hyperbolic system.
pub fn symmetric(system: &HyperbolicSystem, samples: usize, seed: u64, tol: &Tolerances) -> PropertyReport {
    match classify(system, samples, seed, tol) {
        Ok(c) => PropertyReport {
            name: "symmetric".into(),
            passed: c.symmetric,
            samples,
            violations: usize::from(!c.symmetric),
            margin: c
                .diagnostics
                .iter()
                .find(|(k, _)| k == "a0_min_eigenvalue_relative")
                .map_or(f64::NAN, |v| v.1),
            detail: format!(
                "symmetric={} constantly_hyperbolic={} characteristic={} mu={}",
                c.symmetric, c.constantly_hyperbolic, c.characteristic_boundary, c.mu
            ),
        },
        Err(e) => failed("symmetric", &e),
    }
}

/// Names accepted by [`run_property`].
pub const PROPERTY_NAMES: [&str; 11] = [
    "symmetric",
    "resolvent",
    "projector",
    "projector_random",
    "crosscheck",
    "wave_identity",
    "re_sqrt",
    "maxwell_chain",
    "oblique_sequence",
    "energy_bound",
    "loss_of_derivatives",
];

/// Properties that apply to a preset.
pub fn default_properties(preset: &Preset) -> Vec<&'static str> {
    let linear = preset.system.matrices().is_some();
    let mut out = vec![];
    if linear {
        out.extend(["symmetric", "resolvent"]);
    }
    out.push("projector");
    if preset.closed_forms.is_some() {
        out.push("crosscheck");
    }
    match preset.closed_forms {
        Some(ClosedForms::Wave) => {
            out.push("wave_identity");
            if preset.b.tag() == Some(models::OBLIQUE_TAG) {
                out.extend(["re_sqrt", "oblique_sequence"]);
            } else if preset.system.d == 2 {
                out.push("loss_of_derivatives");
            }
        }
        Some(ClosedForms::Maxwell { .. }) => out.push("maxwell_chain"),
        _ => {}
    }
    if linear {
        out.push("energy_bound");
    }
    out
}

/// Sample counts for one verify run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSizes {
    pub samples: usize,
    pub inequality_samples: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self {
            samples: 1000,
            inequality_samples: 100_000,
        }
    }
}

/// Runs one named property on a preset.
pub fn run_property(
    name: &str,
    preset: &Preset,
    sizes: SuiteSizes,
    seed: u64,
    tol: &Tolerances,
) -> Result<PropertyReport> {
    let sys = &preset.system;
    let n = sizes.samples;
    Ok(match name {
        "symmetric" => symmetric(sys, n, seed, tol),
        "resolvent" => resolvent(sys, n, seed, tol).unwrap_or_else(|e| failed("resolvent", &e)),
        "projector" => projector_system(sys, preset.closed_forms.as_ref(), n, seed, tol),
        "projector_random" => projector_random(n.min(1000), seed, tol),
        "crosscheck" => crosscheck(preset, n, seed, tol),
        "wave_identity" => wave_identity(sys.d, sizes.inequality_samples, seed),
        "re_sqrt" => re_sqrt(sizes.inequality_samples, seed),
        "maxwell_chain" => match preset.closed_forms {
            Some(ClosedForms::Maxwell { eps, mu_perm }) => maxwell_chain(eps, mu_perm, sizes.inequality_samples, seed)?,
            _ => maxwell_chain(1.0, 1.0, sizes.inequality_samples, seed)?,
        },
        "oblique_sequence" => {
            let b = preset.b.params();
            oblique_sequence(if b.is_empty() { &[1.0] } else { &b })
        }
        "energy_bound" => energy_bound(sys, &preset.b, n, seed, tol),
        "loss_of_derivatives" => loss_of_derivatives(preset, tol),
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown property '{other}' (known: {})",
                PROPERTY_NAMES.join(", ")
            )))
        }
    })
}
