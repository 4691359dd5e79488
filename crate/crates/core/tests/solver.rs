use hypbc::halfspace::{
    manufactured_frequency_problem, manufactured_spacetime, solve, solve_frequency, Extension, FrequencyContext,
    Pulse, SolverOptions, SpaceTimeGrid, XGrid,
};
use hypbc::hyperbolic::Frequency;
use hypbc::io::GridField;
use hypbc::linalg::{C64, CVec};
use hypbc::models;
use hypbc::sampling::{random_unit, rng_for};
use hypbc::Tolerances;

fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let e: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let s: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (e / s).sqrt()
}

fn frequencies(d: usize, count: usize, seed: u64) -> Vec<Frequency> {
    let mut rng = rng_for(seed, 0);
    (0..count)
        .map(|_| {
            let v = random_unit(&mut rng, d + 1);
            Frequency::new(v[0], v[1..d].to_vec(), v[d].abs().max(0.05)).unwrap()
        })
        .collect()
}

#[test]
fn per_frequency_manufactured_recovery() {
    let tol = Tolerances::default();
    for name in models::PRESET_NAMES {
        let preset = models::preset_by_name(name).unwrap();
        let sys = &preset.system;
        let w = CVec::from_fn(sys.n, |i, _| C64::new(1.0 + i as f64, 0.5 - i as f64));
        let mut worst = 0.0_f64;
        let mut worst_trace = 0.0_f64;
        for freq in frequencies(sys.d, 12, 7) {
            let ctx = FrequencyContext::new(sys, &preset.b, &freq, &tol).unwrap();
            let grid = XGrid::default_for(&ctx.decomp).refined(0.05);
            let (problem, exact) = manufactured_frequency_problem(sys, &preset.b, &freq, &w, grid);
            let sol = solve_frequency(sys, &preset.b, &problem, &SolverOptions::default(), &tol).unwrap();
            worst = worst.max(rel_err(sol.u.as_slice(), exact.as_slice()));
            worst_trace = worst_trace.max(sol.trace_residual);
        }
        println!("{name}: rel err {worst:.3e}, trace {worst_trace:.3e}");
        assert!(worst <= 1e-6, "{name}: {worst}");
        assert!(worst_trace <= 1e-10, "{name}: {worst_trace}");
    }
}

fn spacetime_error(nx: usize, extension: Extension) -> f64 {
    let preset = models::acoustic_control().unwrap();
    let tol = Tolerances::default();
    let x = XGrid::with_extent(16.0, nx).unwrap();
    let grid = SpaceTimeGrid::new(64, 0.125, vec![64], vec![0.25], x).unwrap();
    let w = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(-0.25, 0.0)]);
    let m = manufactured_spacetime(&preset.system, &preset.b, &grid, &w, &Pulse::centred(&grid)).unwrap();
    let opts = SolverOptions { extension };
    let sol = solve(&preset.system, &preset.b, &grid, &m.f, &m.g, 1.0, &opts, &tol).unwrap();
    assert_eq!(sol.failures, 0);
    assert!(sol.diagnostics.max_trace_residual <= 1e-10, "{:?}", sol.diagnostics);
    assert!(sol.diagnostics.parseval_rel_error <= 1e-8, "{:?}", sol.diagnostics);
    let exact_w = weighted(&m.exact, 1.0);
    rel_err(&sol.weighted.data, &exact_w.data)
}

fn weighted(field: &GridField, gamma: f64) -> GridField {
    let mut out = field.clone();
    let per_t = field.data.len() / field.dims[0];
    for k in 0..field.dims[0] {
        let s = (-gamma * field.spacings[0] * k as f64).exp();
        for z in &mut out.data[k * per_t..(k + 1) * per_t] {
            *z *= s;
        }
    }
    out
}

#[test]
fn spacetime_manufactured_convergence() {
    let e1 = spacetime_error(128, Extension::Smooth);
    let e2 = spacetime_error(256, Extension::Smooth);
    let z1 = spacetime_error(128, Extension::Zero);
    let z2 = spacetime_error(256, Extension::Zero);
    println!("smooth {e1:.3e} -> {e2:.3e}; zero {z1:.3e} -> {z2:.3e}");
    assert!(e1 <= 1e-3);
    // At least first order under doubling of the x_d resolution.
    assert!(e2 <= 0.5 * e1 && z2 <= 0.5 * z1);
}
