use hypbc::hyperbolic::classify;
use hypbc::lopatinskii::{check_uniform_ks, estimate_power, require_kernel_inclusion};
use hypbc::models::{acoustic_control, maxwell, symmetric_control, wave_neumann, wave_oblique, Preset};
use hypbc::sampling::geometric_grid;
use hypbc::Tolerances;

fn power(p: &Preset) -> hypbc::lopatinskii::PowerEstimate {
    let grid = geometric_grid(1e-4, 1e-1, 12);
    estimate_power(&p.system, &p.b, &grid, &p.sampling_plan(200, 7), &Tolerances::default()).unwrap()
}

#[test]
fn wave_neumann_half_power() {
    let e = power(&wave_neumann(2).unwrap());
    println!("{e:?}");
    assert!((0.45..=0.55).contains(&e.s_hat), "{}", e.s_hat);
    assert!(e.regression_r2 >= 0.99);
}

#[test]
fn oblique_power_one() {
    let e = power(&wave_oblique(2, &[1.0]).unwrap());
    assert!((0.9..=1.1).contains(&e.raw_slope), "{}", e.raw_slope);
}

#[test]
fn maxwell_power_one() {
    let p = maxwell(1.0, 1.0).unwrap();
    let e = power(&p);
    assert!((0.9..=1.1).contains(&e.raw_slope), "{}", e.raw_slope);
    let tol = Tolerances::default();
    let c = classify(&p.system, 200, 1, &tol).unwrap();
    assert!(c.symmetric && c.characteristic_boundary && c.constantly_hyperbolic && !c.strictly_hyperbolic);
    assert_eq!(c.mu, 2);
    require_kernel_inclusion(&p.system, &p.b, &tol).unwrap();
    assert!(!check_uniform_ks(&p.system, &p.b, &p.sampling_plan(200, 7), &tol).unwrap().holds);
}

#[test]
fn uniform_controls() {
    let tol = Tolerances::default();
    for p in [symmetric_control(0.0).unwrap(), acoustic_control().unwrap()] {
        let u = check_uniform_ks(&p.system, &p.b, &p.sampling_plan(200, 7), &tol).unwrap();
        println!("{} {u:?}", p.name);
        assert!(u.holds, "{}", p.name);
    }
    let s = symmetric_control(0.0).unwrap();
    let u = check_uniform_ks(&s.system, &s.b, &s.sampling_plan(200, 7), &tol).unwrap();
    assert!((u.inf_ratio - 1.0).abs() < 1e-12);
    let w = wave_neumann(2).unwrap();
    assert!(!check_uniform_ks(&w.system, &w.b, &w.sampling_plan(200, 7), &tol).unwrap().holds);
}
