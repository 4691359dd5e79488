use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, CMat};

use super::schur::ordered_schur;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigenClass {
    Stable,
    Unstable,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalue {
    Finite(C64),
    Infinite,
}

impl Eigenvalue {
    pub fn finite(self) -> Option<C64> {
        match self {
            Eigenvalue::Finite(z) => Some(z),
            Eigenvalue::Infinite => None,
        }
    }
}

/// One distinct eigenvalue of the pencil, `alpha A^d z = beta G z`, with its
/// cluster size.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub alpha: C64,
    pub beta: C64,
    pub eigenvalue: Eigenvalue,
    pub class: EigenClass,
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct PencilDecomposition {
    pub eigenpairs: Vec<Eigenpair>,
    /// Orthonormal columns spanning `E^s`, from the ordered Schur form.
    pub stable_basis: CMat,
    /// Orthonormal columns spanning `E^c = N(A^d)`.
    pub central_basis: CMat,
    pub mu: usize,
    /// Minimum distance from stable eigenvalues to every other finite one.
    /// Infinite when there is nothing to separate.
    pub spectral_gap: f64,
    /// Generator `S` of the stable dynamics: every decaying solution is
    /// `U(x) = V_s e^{x S} y` with `V_s = stable_basis`.
    pub stable_generator: CMat,
    /// Unclustered finite eigenvalues with their classes.
    pub finite: Vec<(C64, EigenClass)>,
    /// Spectral shift used to reach a regular reduction.
    pub shift: C64,
}

impl PencilDecomposition {
    pub fn count(&self, class: EigenClass) -> usize {
        self.eigenpairs
            .iter()
            .filter(|p| p.class == class)
            .map(|p| p.multiplicity)
            .sum()
    }

    pub fn stable_eigenvalues(&self) -> Vec<C64> {
        self.finite
            .iter()
            .filter(|(_, k)| *k == EigenClass::Stable)
            .map(|(z, _)| *z)
            .collect()
    }

    /// Largest real part among the stable eigenvalues (negative).
    pub fn stable_abscissa(&self) -> Option<f64> {
        self.stable_eigenvalues()
            .iter()
            .map(|z| z.re)
            .reduce(f64::max)
    }

    /// `int_0^inf |V_s e^{xS} y|^2 dx = y^H X y` with `S^H X + X S = -I`.
    pub fn stable_gramian(&self) -> Result<CMat> {
        linalg::lyapunov(&self.stable_generator, &CMat::identity(self.mu, self.mu))
    }
}

fn shifts(scale: f64) -> [C64; 5] {
    [
        C64::new(0.0, 0.0),
        C64::new(0.37, 0.61) * scale,
        C64::new(-0.53, 0.29) * scale,
        C64::new(0.11, -0.83) * scale,
        C64::new(1.7, 1.3) * scale,
    ]
}

/// Eigenstructure of the regular pencil `(A^d, G)`.
///
/// Reduces to the standard problem `(G - sigma A^d)^{-1} A^d`, whose
/// eigenvalues are `nu = 1 / (lambda - sigma)`; `nu = 0` marks the infinite
/// eigenvalues. The complex Schur form is reordered to put the stable
/// eigenvalues first, giving an orthonormal stable basis.
pub fn pencil_eigen(ad: &CMat, g: &CMat, tol: &Tolerances) -> Result<PencilDecomposition> {
    let n = ad.nrows();
    if ad.shape() != (n, n) || g.shape() != (n, n) || n == 0 {
        return Err(Error::InvalidInput(format!(
            "pencil matrices must be square and equal-sized, got {:?} and {:?}",
            ad.shape(),
            g.shape()
        )));
    }
    let scale = ad.norm().max(g.norm()).max(f64::MIN_POSITIVE);
    let ad_s = ad.unscale(scale);
    let g_s = g.unscale(scale);

    let mut best = 0.0_f64;
    let mut reduction = None;
    for sigma in shifts(1.0) {
        let shifted = &g_s - &ad_s * sigma;
        let r = linalg::rcond(&shifted);
        best = best.max(r);
        if r > tol.singular.max(1e-13) {
            if let Some(inv) = linalg::inverse_fast(&shifted) {
                reduction = Some((sigma, inv));
                break;
            }
        }
    }
    let (sigma, k) = reduction.ok_or(Error::SingularPencil {
        rcond: best,
        threshold: tol.singular.max(1e-13),
    })?;
    let m = &k * &ad_s;

    let is_infinite = |nu: C64| {
        // (alpha, beta) = (1 + sigma nu, nu) up to scaling.
        let alpha = C64::new(1.0, 0.0) + sigma * nu;
        nu.norm() <= tol.infinite * (alpha.norm() + nu.norm())
    };
    let to_lambda = |nu: C64| sigma + C64::new(1.0, 0.0) / nu;
    let is_stable = |nu: C64| !is_infinite(nu) && to_lambda(nu).re < 0.0;

    let schur = ordered_schur(&m, is_stable)?;
    let mu = schur.selected;

    let mut finite = Vec::with_capacity(n);
    let mut infinite_count = 0;
    let mut raw: Vec<(C64, C64)> = Vec::with_capacity(n);
    for i in 0..n {
        let nu = schur.t[(i, i)];
        let alpha = C64::new(1.0, 0.0) + sigma * nu;
        let norm = (alpha.norm_sqr() + nu.norm_sqr()).sqrt();
        raw.push((alpha / norm, nu / norm));
        if is_infinite(nu) {
            infinite_count += 1;
            continue;
        }
        // Eigenvalues of the scaled pencil equal those of the original one.
        let lambda = to_lambda(nu);
        let margin = lambda.re.abs();
        let allowed = tol.imaginary_axis * lambda.norm().max(1.0);
        if margin <= allowed {
            return Err(Error::GapCollapse {
                margin,
                tolerance: allowed,
                context: "finite eigenvalue on the imaginary axis",
            });
        }
        let class = if lambda.re < 0.0 {
            EigenClass::Stable
        } else {
            EigenClass::Unstable
        };
        finite.push((lambda, class));
    }

    let eigenpairs = cluster(&finite, infinite_count, &raw, tol.cluster);

    let stable_basis = schur.q.columns(0, mu).into_owned();
    let t11 = schur.t.view((0, 0), (mu, mu)).into_owned();
    let stable_generator = if mu == 0 {
        CMat::zeros(0, 0)
    } else {
        let inv = linalg::inverse_fast(&t11).ok_or(Error::SingularMatrix {
            rcond: 0.0,
            threshold: tol.singular,
        })?;
        // Undo the reduction scaling: A U' = G U is invariant under a common
        // factor, so S is already in the original units.
        inv + CMat::identity(mu, mu) * sigma
    };

    let central_basis = linalg::null_space(ad, tol.rank);

    let mut gap = f64::INFINITY;
    for (s, ks) in &finite {
        if *ks != EigenClass::Stable {
            continue;
        }
        for (o, ko) in &finite {
            if *ko != EigenClass::Stable {
                gap = gap.min((s - o).norm());
            }
        }
    }

    Ok(PencilDecomposition {
        eigenpairs,
        stable_basis,
        central_basis,
        mu,
        spectral_gap: gap,
        stable_generator,
        finite,
        shift: sigma,
    })
}

fn cluster(
    finite: &[(C64, EigenClass)],
    infinite_count: usize,
    raw: &[(C64, C64)],
    rel: f64,
) -> Vec<Eigenpair> {
    let n = finite.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, _) = finite[i];
            let (b, _) = finite[j];
            if (a - b).norm() <= rel * a.norm().max(b.norm()).max(1.0) {
                let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                if ri != rj {
                    label[rj] = ri;
                }
            }
        }
    }
    let mut out: Vec<Eigenpair> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = root(&mut label, i);
        if let Some(pos) = seen.iter().position(|&s| s == r) {
            out[pos].multiplicity += 1;
        } else {
            seen.push(r);
            let lambda = finite[i].0;
            let norm = (1.0 + lambda.norm_sqr()).sqrt();
            out.push(Eigenpair {
                alpha: lambda / norm,
                beta: C64::new(1.0 / norm, 0.0),
                eigenvalue: Eigenvalue::Finite(lambda),
                class: finite[i].1,
                multiplicity: 1,
            });
        }
    }
    if infinite_count > 0 {
        let (alpha, beta) = raw
            .iter()
            .copied()
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap_or((C64::new(1.0, 0.0), C64::new(0.0, 0.0)));
        out.push(Eigenpair {
            alpha,
            beta,
            eigenvalue: Eigenvalue::Infinite,
            class: EigenClass::Central,
            multiplicity: infinite_count,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real, re};

    #[test]
    fn scalar_stable() {
        let ad = from_real(1, 1, &[1.0]);
        let g = from_real(1, 1, &[-1.0]);
        let d = pencil_eigen(&ad, &g, &Tolerances::default()).unwrap();
        assert_eq!(d.mu, 1);
        assert_eq!(d.eigenpairs.len(), 1);
        let p = &d.eigenpairs[0];
        assert_eq!(p.class, EigenClass::Stable);
        assert!((p.eigenvalue.finite().unwrap() - re(-1.0)).norm() < 1e-14);
        assert!((d.stable_generator[(0, 0)] - re(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn wave_at_pole() {
        let ad = CMat::identity(2, 2);
        let g = from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let d = pencil_eigen(&ad, &g, &Tolerances::default()).unwrap();
        assert_eq!(d.mu, 1);
        let v = d.stable_basis.column(0);
        // proportional to (1, -1)
        assert!((v[0] + v[1]).norm() < 1e-14);
        assert!((d.spectral_gap - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_pencil_detected() {
        let ad = from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let g = from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let err = pencil_eigen(&ad, &g, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::SingularPencil { .. }));
    }

    #[test]
    fn imaginary_eigenvalue_is_gap_collapse() {
        let ad = CMat::identity(1, 1);
        let g = CMat::from_element(1, 1, C64::new(0.0, 2.0));
        let err = pencil_eigen(&ad, &g, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::GapCollapse { .. }));
    }

    #[test]
    fn infinite_eigenvalues_are_central() {
        let ad = from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let g = from_real(3, 3, &[-2.0, 0.0, 0.0, 0.0, -3.0, 0.0, 0.0, 0.0, 1.0]);
        let d = pencil_eigen(&ad, &g, &Tolerances::default()).unwrap();
        assert_eq!(d.count(EigenClass::Stable), 1);
        assert_eq!(d.count(EigenClass::Unstable), 1);
        assert_eq!(d.count(EigenClass::Central), 1);
        assert_eq!(d.central_basis.ncols(), 1);
        let total: usize = d.eigenpairs.iter().map(|p| p.multiplicity).sum();
        assert_eq!(total, 3);
    }
}
