use proptest::prelude::*;

use hypbc::algebra::{contour_from_spectrum, pencil_eigen, SpectralProjection};
use hypbc::halfspace::{fft_axes, solve_frequency, FrequencyContext, FrequencyProblem, SolverOptions, XGrid};
use hypbc::hyperbolic::{build_g, Frequency};
use hypbc::linalg::{self, CMat, CVec, C64};
use hypbc::lopatinskii::{ks_ratio, Weight};
use hypbc::models;
use hypbc::verify::random_pencil;
use hypbc::Tolerances;

fn freq_strategy(d: usize) -> impl Strategy<Value = Frequency> {
    (
        -3.0..3.0f64,
        proptest::collection::vec(-3.0..3.0f64, d - 1),
        0.05..3.0f64,
    )
        .prop_map(|(t, e, g)| Frequency::new(t, e, g).unwrap())
}

fn unitary(theta: f64, phi: f64, n: usize) -> CMat {
    if n == 1 {
        return CMat::from_element(1, 1, C64::from_polar(1.0, phi));
    }
    let mut u = CMat::identity(n, n);
    let (c, s) = (theta.cos(), theta.sin());
    let e = C64::from_polar(1.0, phi);
    u[(0, 0)] = C64::new(c, 0.0);
    u[(0, 1)] = -e.conj() * s;
    u[(1, 0)] = e * s;
    u[(1, 1)] = C64::new(c, 0.0);
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_idempotent(f in freq_strategy(3)) {
        let once = f.normalized();
        let twice = once.normalized();
        prop_assert!((once.tau - twice.tau).abs() < 1e-15);
        prop_assert!((once.gamma - twice.gamma).abs() < 1e-15);
        for (a, b) in once.eta.iter().zip(&twice.eta) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn build_g_linear_and_conjugate(f in freq_strategy(3)) {
        let preset = models::maxwell(1.0, 1.0).unwrap();
        let sys = &preset.system;
        let g = build_g(sys, &f);
        let mirrored = Frequency::new(-f.tau, f.eta.iter().map(|e| -e).collect(), f.gamma).unwrap();
        let gm = build_g(sys, &mirrored);
        prop_assert!((&gm - g.map(|z| z.conj())).norm() <= 1e-12 * g.norm());
        let a = Frequency::new(f.tau, vec![0.0, 0.0], f.gamma).unwrap();
        let b = Frequency::new(0.0, f.eta.clone(), 1e-300).unwrap();
        prop_assert!((build_g(sys, &a) + build_g(sys, &b) - &g).norm() <= 1e-12 * g.norm());
    }

    #[test]
    fn ks_ratio_scale_invariance(f in freq_strategy(3), theta in 0.0..6.3f64, phi in 0.0..6.3f64, c in 0.1..5.0f64) {
        let tol = Tolerances::default();
        let preset = models::maxwell(1.0, 1.0).unwrap();
        let sys = &preset.system;
        let decomp = pencil_eigen(sys.ad(), &build_g(sys, &f), &tol).unwrap();
        let b = preset.b.matrix_at(&f);
        for weight in [Weight::AdWeighted, Weight::IdentityWeighted] {
            let r = ks_ratio(&b, sys.ad(), &decomp.stable_basis, weight, &tol).unwrap();
            let rotated = &decomp.stable_basis * unitary(theta, phi, decomp.mu);
            let r_rot = ks_ratio(&b, sys.ad(), &rotated, weight, &tol).unwrap();
            let scaled = ks_ratio(&(&b * C64::new(c, 0.0)), sys.ad(), &decomp.stable_basis, weight, &tol).unwrap();
            prop_assert!((r - r_rot).abs() <= 1e-10 * r.max(1e-300));
            prop_assert!((scaled - c * r).abs() <= 1e-10 * c * r.max(1e-300));
        }
    }

    #[test]
    fn projector_invariants(index in 0u64..500) {
        let tol = Tolerances::default();
        let (a, g, exact) = random_pencil(17, index);
        let decomp = pencil_eigen(&a, &g, &tol).unwrap();
        let contour = contour_from_spectrum(&decomp, &tol).unwrap();
        let proj = SpectralProjection::new(&a, &g, &contour, &tol).unwrap();
        let p = &proj.projector;
        let scale = p.norm().max(1.0);
        prop_assert!((p * p - p).norm() <= 1e-10 * scale);
        prop_assert_eq!(linalg::numerical_rank(p, 1e-8), decomp.mu);
        // Null vectors of A are annihilated.
        let null = linalg::null_space(&a, 1e-10);
        if null.ncols() > 0 {
            prop_assert!((p * &null).norm() <= 1e-9 * scale);
        } else {
            // Non-characteristic: P commutes with A^{-1} G.
            let m = linalg::inverse(&a, 1e-14).unwrap() * &g;
            prop_assert!((p * &m - &m * p).norm() <= 1e-9 * scale * m.norm());
        }
        prop_assert!(linalg::max_principal_angle(&decomp.stable_basis, &exact) <= 1e-8);
        // Decay of the propagator at half the stable abscissa.
        let sigma = decomp.stable_abscissa().unwrap();
        let t0 = linalg::spectral_norm(&proj.propagator(0.0, &tol).unwrap());
        for x in [0.5, 2.0, 8.0] {
            let t = linalg::spectral_norm(&proj.propagator(x, &tol).unwrap());
            prop_assert!(t <= 10.0 * t0.max(1.0) * (sigma * x / 2.0).exp(), "x={} |T|={}", x, t);
        }
    }

    #[test]
    fn dft_parseval(re in proptest::collection::vec(-1.0..1.0f64, 24), im in proptest::collection::vec(-1.0..1.0f64, 24)) {
        let mut data: Vec<C64> = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
        let before: f64 = data.iter().map(|z| z.norm_sqr()).sum();
        fft_axes(&mut data, &[4, 3], 2, &[0, 1], false);
        let after: f64 = data.iter().map(|z| z.norm_sqr()).sum::<f64>() / 12.0;
        prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0));
        fft_axes(&mut data, &[4, 3], 2, &[0, 1], true);
        for (z, (a, b)) in data.iter().zip(re.iter().zip(&im)) {
            prop_assert!((z / 12.0 - C64::new(*a, *b)).norm() < 1e-13);
        }
    }

    #[test]
    fn wave_symbol_identity(f in freq_strategy(3)) {
        let q = models::wave_q(&f);
        let (t2, e2, g2) = (f.tau * f.tau, f.eta_norm_sqr(), f.gamma * f.gamma);
        let rhs = (t2 - e2).powi(2) + g2 * g2 + 2.0 * g2 * e2 + 2.0 * t2 * g2;
        prop_assert!((q.norm_sqr() - rhs).abs() <= 1e-12 * rhs);
        prop_assert!(q.norm_sqr() >= g2 * (g2 + 2.0 * t2 + 2.0 * e2) * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solve_deterministic_with_trace_identity(preset_index in 0usize..5, f in freq_strategy(3)) {
        let tol = Tolerances::default();
        let name = models::PRESET_NAMES[preset_index % models::PRESET_NAMES.len()];
        let preset = models::preset_by_name(name).unwrap();
        let sys = &preset.system;
        let freq = Frequency::new(f.tau, f.eta[..sys.d - 1].to_vec(), f.gamma).unwrap();
        let ctx = FrequencyContext::new(sys, &preset.b, &freq, &tol).unwrap();
        let grid = XGrid::default_for(&ctx.decomp);
        let f_hat = CMat::from_fn(sys.n, grid.n, |c, j| {
            C64::new(1.0 + c as f64, -0.5) * (-(grid.x(j) - grid.extent() / 10.0).powi(2) / (grid.extent() / 30.0).powi(2)).exp()
        });
        let g_hat = CVec::from_fn(preset.b.mu(), |i, _| C64::new(0.3, i as f64));
        let problem = FrequencyProblem { freq, grid, f_hat, g_hat };
        let a = solve_frequency(sys, &preset.b, &problem, &SolverOptions::default(), &tol).unwrap();
        let b = solve_frequency(sys, &preset.b, &problem, &SolverOptions::default(), &tol).unwrap();
        prop_assert_eq!(&a.u, &b.u);
        prop_assert!(a.trace_residual <= 1e-10, "{}: {}", name, a.trace_residual);
    }
}
