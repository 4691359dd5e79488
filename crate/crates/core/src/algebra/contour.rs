use std::f64::consts::PI;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, CMat, CVec};

use super::pencil::{EigenClass, PencilDecomposition};

/// Positively oriented circle used for the trapezoidal contour integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

/// Circle around the stable cluster: centred at its centroid, radius equal
/// to the farthest stable point plus half of the remaining clearance to the
/// nearest excluded eigenvalue.
pub fn contour_from_spectrum(decomp: &PencilDecomposition, tol: &Tolerances) -> Result<Contour> {
    let stable = decomp.stable_eigenvalues();
    if stable.is_empty() {
        return Err(Error::InvalidInput(
            "no stable eigenvalue to enclose".into(),
        ));
    }
    if decomp.spectral_gap <= tol.gap {
        return Err(Error::GapCollapse {
            margin: decomp.spectral_gap,
            tolerance: tol.gap,
            context: "stable and unstable eigenvalues coincide",
        });
    }
    let center = stable.iter().sum::<C64>() / stable.len() as f64;
    let inner = stable
        .iter()
        .map(|z| (z - center).norm())
        .fold(0.0_f64, f64::max);
    let outer = decomp
        .finite
        .iter()
        .filter(|(_, k)| *k != EigenClass::Stable)
        .map(|(z, _)| (z - center).norm())
        .fold(f64::INFINITY, f64::min);
    let radius = if outer.is_finite() {
        let clearance = outer - inner;
        if clearance <= tol.gap * outer.max(1.0) {
            return Err(Error::GapCollapse {
                margin: clearance,
                tolerance: tol.gap * outer.max(1.0),
                context: "no circle about the stable centroid separates the spectrum",
            });
        }
        inner + 0.5 * clearance
    } else {
        // Nothing to exclude: any circle containing the stable points works.
        (2.0 * inner).max(1.0)
    };
    Ok(Contour {
        center,
        radius,
        nodes: tol.initial_nodes,
    })
}

/// Trapezoidal discretization of `oint f(zeta) (zeta A - G)^{-1} A d zeta / (2 pi i)`.
#[derive(Debug, Clone)]
struct Quadrature {
    points: Vec<C64>,
    weights: Vec<C64>,
    resolvents: Vec<CMat>,
}

impl Quadrature {
    fn build(ad: &CMat, g: &CMat, contour: &Contour, nodes: usize) -> Result<Self> {
        let mut points = Vec::with_capacity(nodes);
        let mut weights = Vec::with_capacity(nodes);
        let mut resolvents = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let theta = 2.0 * PI * (k as f64 + 0.5) / nodes as f64;
            let e = C64::from_polar(1.0, theta);
            let zeta = contour.center + e * contour.radius;
            // d zeta / (2 pi i) = r e^{i theta} d theta / (2 pi)
            let w = e * contour.radius / nodes as f64;
            let m = ad * zeta - g;
            let inv = linalg::inverse_fast(&m).ok_or(Error::SingularMatrix {
                rcond: 0.0,
                threshold: 0.0,
            })?;
            points.push(zeta);
            weights.push(w);
            resolvents.push(inv * ad);
        }
        Ok(Self {
            points,
            weights,
            resolvents,
        })
    }

    fn integrate(&self, x: f64) -> CMat {
        let n = self.resolvents[0].nrows();
        let mut acc = CMat::zeros(n, n);
        for ((z, w), r) in self.points.iter().zip(&self.weights).zip(&self.resolvents) {
            let f = if x == 0.0 { *w } else { *w * (z * x).exp() };
            acc += r * f;
        }
        acc
    }
}

fn idempotency_residual(p: &CMat) -> f64 {
    linalg::spectral_norm(&(p * p - p))
}

/// The spectral projector onto the stable subspace together with the data
/// needed to evaluate the propagator `T(x)`.
#[derive(Debug, Clone)]
pub struct SpectralProjection {
    pub contour: Contour,
    pub projector: CMat,
    pub residual: f64,
    ad: CMat,
    g: CMat,
}

impl SpectralProjection {
    /// Doubles the node count from `contour.nodes` until the idempotency
    /// residual is below `tol.projector * max(1, |Pi|)`, or below the
    /// rounding floor `64 eps |Pi|^2` for badly conditioned splittings.
    pub fn new(ad: &CMat, g: &CMat, contour: &Contour, tol: &Tolerances) -> Result<Self> {
        let mut nodes = contour.nodes.max(4);
        let mut last_residual = f64::INFINITY;
        loop {
            let quad = Quadrature::build(ad, g, contour, nodes)?;
            let p = quad.integrate(0.0);
            let residual = idempotency_residual(&p);
            let norm = linalg::spectral_norm(&p);
            let target = (tol.projector * norm.max(1.0)).max(64.0 * f64::EPSILON * norm * norm);
            if residual <= target {
                return Ok(Self {
                    contour: Contour { nodes, ..*contour },
                    projector: p,
                    residual,
                    ad: ad.clone(),
                    g: g.clone(),
                });
            }
            last_residual = residual.min(last_residual);
            if nodes * 2 > tol.max_nodes {
                return Err(Error::QuadratureDivergence {
                    residual: last_residual,
                    tolerance: target,
                    nodes,
                });
            }
            nodes *= 2;
        }
    }

    /// `T(x) = (1/2 pi i) oint e^{x zeta} (zeta A - G)^{-1} A d zeta`.
    ///
    /// The exponential is entire, so the trapezoidal rule needs roughly
    /// `e x r` extra nodes; past `x r = 4` the semigroup law
    /// `T(2x) = T(x)^2` keeps the contour sum free of cancellation.
    pub fn propagator(&self, x: f64, tol: &Tolerances) -> Result<CMat> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::InvalidInput(format!("propagator needs x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(self.projector.clone());
        }
        let r = self.contour.radius;
        let mut halvings = 0u32;
        let mut base = x;
        while base * r > 4.0 {
            base *= 0.5;
            halvings += 1;
        }
        let needed = ((2.0 * std::f64::consts::E * base * r) as usize + 64).next_power_of_two();
        let nodes = needed.max(self.contour.nodes).min(tol.max_nodes);
        let quad = Quadrature::build(&self.ad, &self.g, &self.contour, nodes)?;
        let mut t = quad.integrate(base);
        for _ in 0..halvings {
            t = &t * &t;
        }
        Ok(t)
    }

    /// `T(j h) c` for `j = 0..count`, built by repeated application of `T(h)`.
    pub fn propagate_grid(&self, c: &CVec, h: f64, count: usize, tol: &Tolerances) -> Result<Vec<CVec>> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return Ok(out);
        }
        let mut v = &self.projector * c;
        out.push(v.clone());
        if count > 1 {
            let step = self.propagator(h, tol)?;
            for _ in 1..count {
                v = &step * v;
                out.push(v.clone());
            }
        }
        Ok(out)
    }
}

/// Contour-integral spectral projector onto the stable subspace.
pub fn spectral_projector(ad: &CMat, g: &CMat, contour: &Contour, tol: &Tolerances) -> Result<CMat> {
    Ok(SpectralProjection::new(ad, g, contour, tol)?.projector)
}

/// Decaying propagator `T(x)`; `T(0)` is the spectral projector.
pub fn propagator(ad: &CMat, g: &CMat, contour: &Contour, x: f64, tol: &Tolerances) -> Result<CMat> {
    SpectralProjection::new(ad, g, contour, tol)?.propagator(x, tol)
}

/// Spectral norm of `(i xi_d A^d - G)^{-1}`.
pub fn resolvent_norm(ad: &CMat, g: &CMat, xi_d: f64, tol: &Tolerances) -> Result<f64> {
    let m = ad * C64::new(0.0, xi_d) - g;
    let s = linalg::singular_values(&m);
    let hi = s.first().copied().unwrap_or(0.0);
    let lo = s.last().copied().unwrap_or(0.0);
    let r = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(r > tol.singular) {
        return Err(Error::SingularMatrix {
            rcond: r,
            threshold: tol.singular,
        });
    }
    Ok(1.0 / lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pencil_eigen;
    use crate::linalg::{c, from_real, re};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn contour_single_stable() {
        let ad = CMat::identity(2, 2);
        let g = from_real(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let d = pencil_eigen(&ad, &g, &tol()).unwrap();
        let ct = contour_from_spectrum(&d, &tol()).unwrap();
        assert!((ct.center - re(-1.0)).norm() < 1e-14);
        assert!((ct.radius - 1.0).abs() < 1e-14);
        assert_eq!(ct.nodes, 64);
    }

    #[test]
    fn contour_complex_pair() {
        let ad = CMat::identity(3, 3);
        let g = CMat::from_diagonal(&CVec::from_vec(vec![c(-1.0, 1.0), c(-1.0, -1.0), re(2.0)]));
        let d = pencil_eigen(&ad, &g, &tol()).unwrap();
        let ct = contour_from_spectrum(&d, &tol()).unwrap();
        for s in [c(-1.0, 1.0), c(-1.0, -1.0)] {
            assert!((s - ct.center).norm() < ct.radius);
        }
        assert!((re(2.0) - ct.center).norm() > ct.radius);
    }

    #[test]
    fn contour_gap_collapse() {
        let ad = CMat::identity(2, 2);
        let g = CMat::from_diagonal(&CVec::from_vec(vec![c(-1e-3, 0.0), c(1e-3, 0.0)]));
        let d = pencil_eigen(&ad, &g, &tol()).unwrap();
        let strict = Tolerances { gap: 1e-2, ..tol() };
        assert!(matches!(
            contour_from_spectrum(&d, &strict),
            Err(Error::GapCollapse { .. })
        ));
    }

    #[test]
    fn scalar_projector_and_propagator() {
        let ad = from_real(1, 1, &[1.0]);
        let g = from_real(1, 1, &[-1.0]);
        let d = pencil_eigen(&ad, &g, &tol()).unwrap();
        let ct = contour_from_spectrum(&d, &tol()).unwrap();
        let sp = SpectralProjection::new(&ad, &g, &ct, &tol()).unwrap();
        assert!((sp.projector[(0, 0)] - re(1.0)).norm() < 1e-14);
        for x in [0.0, 0.5, 3.0, 40.0] {
            let t = sp.propagator(x, &tol()).unwrap();
            let want = (-x).exp();
            assert!((t[(0, 0)] - re(want)).norm() <= 1e-12 * want.max(1e-300) + 1e-300, "x={x}");
        }
    }

    #[test]
    fn wave_projector_closed_form() {
        let ad = CMat::identity(2, 2);
        let g = from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let d = pencil_eigen(&ad, &g, &tol()).unwrap();
        let ct = contour_from_spectrum(&d, &tol()).unwrap();
        let p = spectral_projector(&ad, &g, &ct, &tol()).unwrap();
        let want = from_real(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((p - want).norm() < 1e-13);
    }

    #[test]
    fn resolvent_scalar_closed_form() {
        let ad = from_real(1, 1, &[1.0]);
        for (tau, xi, gamma) in [(0.0, 0.0, 1.0), (0.3, -1.2, 0.5), (2.0, 1.0, 0.1)] {
            let g = CMat::from_element(1, 1, c(-gamma, -tau));
            let v = resolvent_norm(&ad, &g, xi, &tol()).unwrap();
            let want = ((xi + tau) * (xi + tau) + gamma * gamma).powf(-0.5);
            assert!((v - want).abs() < 1e-14 * want);
            assert!(v <= 1.0 / gamma * (1.0 + 1e-14));
        }
    }

    #[test]
    fn resolvent_singular() {
        let ad = from_real(1, 1, &[1.0]);
        let g = CMat::from_element(1, 1, c(0.0, 0.0));
        assert!(matches!(
            resolvent_norm(&ad, &g, 0.0, &tol()),
            Err(Error::SingularMatrix { .. })
        ));
    }
}
