//! Acceptance suite: one PASS/FAIL line per criterion at the pinned
//! tolerances. Exits nonzero if a criterion fails that is not listed in
//! `KNOWN_RED`, or if a known-red criterion stops matching its analysed
//! behaviour.

use std::process::{Command, ExitCode};
use std::time::Instant;

use hypbc::halfspace::{
    manufactured_frequency_problem, manufactured_spacetime, solve, solve_frequency, verify_weighted_estimate,
    EstimateMode, Extension, FrequencyContext, Pulse, SolverOptions, SpaceTimeGrid, XGrid,
};
use hypbc::hyperbolic::{check_resolvent_bound, classify, Frequency, HyperbolicSystem};
use hypbc::io::GridField;
use hypbc::linalg::{from_real, CVec, C64};
use hypbc::lopatinskii::{check_uniform_ks, estimate_power, require_kernel_inclusion, PowerEstimate};
use hypbc::models::{self, Preset};
use hypbc::sampling::{geometric_grid, random_unit, rng_for};
use hypbc::verify;
use hypbc::Tolerances;

/// Criteria whose literal threshold cannot hold; see the README.
const KNOWN_RED: &[usize] = &[2];

struct Outcome {
    passed: bool,
    detail: String,
    /// For known-red criteria: the analysed behaviour still holds.
    expected: bool,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self {
            passed,
            detail,
            expected: passed,
        }
    }
}

fn power(p: &Preset, grid: &[f64]) -> PowerEstimate {
    estimate_power(&p.system, &p.b, grid, &p.sampling_plan(200, 7), &Tolerances::default()).unwrap()
}

fn c1_wave_power() -> Outcome {
    let start = Instant::now();
    let e = power(&models::wave_neumann(2).unwrap(), &geometric_grid(1e-4, 1e-3, 8));
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        (0.45..=0.55).contains(&e.s_hat) && e.regression_r2 >= 0.99 && secs <= 60.0,
        format!("s_hat={:.4} r2={:.6} time={secs:.2}s", e.s_hat, e.regression_r2),
    )
}

fn c2_oblique() -> Outcome {
    let e = power(&models::wave_oblique(2, &[1.0]).unwrap(), &geometric_grid(1e-4, 1e-1, 12));
    let slope_ok = (0.9..=1.1).contains(&e.s_hat) && (0.9..=1.1).contains(&e.raw_slope);
    let seq = verify::oblique_sequence_ratios(&[1.0], 16).unwrap();
    let monotone = seq.windows(2).all(|w| w[1].1 < w[0].1);
    let last = seq.last().unwrap().1;
    // |B z_n| / gamma^0.9 -> sqrt(2) gamma^0.1 for b = (1): 0.467 at 2^-16.
    let asymptote = seq
        .iter()
        .skip(4)
        .all(|(g, r)| (r / (2f64.sqrt() * g.powf(0.1)) - 1.0).abs() <= 0.05);
    Outcome {
        passed: slope_ok && monotone && last < 0.1,
        expected: slope_ok && monotone && asymptote,
        detail: format!(
            "s_hat={:.4} raw_slope={:.4} monotone={monotone} ratio_at_2^-16={last:.4} (needs < 0.1; limit sqrt(2) gamma^0.1)",
            e.s_hat, e.raw_slope
        ),
    }
}

fn c3_maxwell() -> Outcome {
    let tol = Tolerances::default();
    let p = models::maxwell(1.0, 1.0).unwrap();
    let e = power(&p, &geometric_grid(1e-4, 1e-1, 12));
    let c = classify(&p.system, 200, 7, &tol).unwrap();
    let kernel = require_kernel_inclusion(&p.system, &p.b, &tol).is_ok();
    let uniform = check_uniform_ks(&p.system, &p.b, &p.sampling_plan(200, 7), &tol).unwrap();
    Outcome::new(
        (0.9..=1.1).contains(&e.s_hat) && c.mu == 2 && kernel && !uniform.holds,
        format!(
            "s_hat={:.4} raw_slope={:.4} mu={} kernel_inclusion={kernel} uniform_ks={}",
            e.s_hat, e.raw_slope, c.mu, uniform.holds
        ),
    )
}

/// Incoming pulse `u = (h(t - x), 0)` of the symmetric control, exact with
/// `f = 0` and `g = h`.
fn c4_positive_control() -> Outcome {
    let tol = Tolerances::default();
    let preset = models::symmetric_control(0.0).unwrap();
    let u = check_uniform_ks(&preset.system, &preset.b, &preset.sampling_plan(200, 7), &tol).unwrap();
    let (nt, dt) = (256, 4.0 / 256.0);
    let h = |t: f64| (-0.5 * ((t - 1.0) / 0.05).powi(2)).exp();
    let mut ratios = vec![];
    for k in 1..=7 {
        let gamma = 2f64.powi(k);
        let x = XGrid::with_extent(40.0 / gamma, 1024).unwrap();
        let grid = SpaceTimeGrid::new(nt, dt, vec![], vec![], x).unwrap();
        let f = GridField::zeros(preset.system.n, grid.interior_dims(), grid.interior_spacings(), 0.0);
        let mut g = GridField::zeros(1, grid.tangential_dims(), grid.tangential_spacings(), 0.0);
        for i in 0..nt {
            g.set(i, 0, C64::new(h(grid.t(i)), 0.0));
        }
        let sol = solve(&preset.system, &preset.b, &grid, &f, &g, gamma, &SolverOptions::default(), &tol).unwrap();
        ratios.push(verify_weighted_estimate(&sol, &f, &g, 0.0, EstimateMode::Standard).unwrap().ratio);
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome::new(
        u.holds && u.inf_ratio >= 0.9 && max / min <= 3.0,
        format!("inf_ratio={:.6} ratio_band={:.4} over gamma=2..128", u.inf_ratio, max / min),
    )
}

fn c5_resolvent() -> Outcome {
    let tol = Tolerances::default();
    let scalar =
        HyperbolicSystem::linear("scalar", vec![from_real(1, 1, &[1.0]), from_real(1, 1, &[1.0])], &tol).unwrap();
    let s = check_resolvent_bound(&scalar, 10_000, &[1e-3, 1e-1, 1.0, 1e3], 9, &tol).unwrap();
    let m = verify::resolvent(&models::maxwell(1.0, 1.0).unwrap().system, 10_000, 7, &tol).unwrap();
    Outcome::new(
        (s.value - 1.0).abs() <= 1e-9 && m.passed,
        format!("scalar_sup={:.12} maxwell: {}", s.value, m.detail),
    )
}

fn c6_projector() -> Outcome {
    let r = verify::projector_random(100, 7, &Tolerances::default());
    Outcome::new(r.passed, format!("pencils={} violations={} {}", r.samples, r.violations, r.detail))
}

fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let e: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let s: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (e / s).sqrt()
}

fn spacetime_error(nx: usize, extension: Extension) -> (f64, f64) {
    let preset = models::acoustic_control().unwrap();
    let tol = Tolerances::default();
    let x = XGrid::with_extent(16.0, nx).unwrap();
    let grid = SpaceTimeGrid::new(64, 0.125, vec![64], vec![0.25], x).unwrap();
    let w = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(-0.25, 0.0)]);
    let m = manufactured_spacetime(&preset.system, &preset.b, &grid, &w, &Pulse::centred(&grid)).unwrap();
    let sol = solve(&preset.system, &preset.b, &grid, &m.f, &m.g, 1.0, &SolverOptions { extension }, &tol).unwrap();
    let per_t = m.exact.data.len() / grid.nt;
    let exact: Vec<C64> = m
        .exact
        .data
        .iter()
        .enumerate()
        .map(|(i, z)| z * (-grid.t(i / per_t)).exp())
        .collect();
    let trace = if sol.failures == 0 {
        sol.diagnostics.max_trace_residual
    } else {
        f64::INFINITY
    };
    (rel_err(&sol.weighted.data, &exact), trace)
}

fn c7_solver() -> Outcome {
    let tol = Tolerances::default();
    let (mut freq_err, mut freq_trace) = (0.0_f64, 0.0_f64);
    for name in models::PRESET_NAMES {
        let preset = models::preset_by_name(name).unwrap();
        let sys = &preset.system;
        let w = CVec::from_fn(sys.n, |i, _| C64::new(1.0 + i as f64, 0.5 - i as f64));
        let mut rng = rng_for(7, 0);
        for _ in 0..12 {
            let v = random_unit(&mut rng, sys.d + 1);
            let freq = Frequency::new(v[0], v[1..sys.d].to_vec(), v[sys.d].abs().max(0.05)).unwrap();
            let ctx = FrequencyContext::new(sys, &preset.b, &freq, &tol).unwrap();
            let grid = XGrid::default_for(&ctx.decomp).refined(0.05);
            let (problem, exact) = manufactured_frequency_problem(sys, &preset.b, &freq, &w, grid);
            let sol = solve_frequency(sys, &preset.b, &problem, &SolverOptions::default(), &tol).unwrap();
            freq_err = freq_err.max(rel_err(sol.u.as_slice(), exact.as_slice()));
            freq_trace = freq_trace.max(sol.trace_residual);
        }
    }
    let (e1, t1) = spacetime_error(128, Extension::Smooth);
    let (e2, t2) = spacetime_error(256, Extension::Smooth);
    let (z1, _) = spacetime_error(128, Extension::Zero);
    let (z2, _) = spacetime_error(256, Extension::Zero);
    let trace = freq_trace.max(t1).max(t2);
    Outcome::new(
        freq_err <= 1e-6 && e1 <= 1e-3 && e2 <= 0.5 * e1 && z2 <= 0.5 * z1 && trace <= 1e-10,
        format!(
            "per_frequency={freq_err:.3e} spacetime_64x64x128={e1:.3e} doubled={e2:.3e} \
             zero_ext={z1:.3e}->{z2:.3e} max_trace_residual={trace:.3e}"
        ),
    )
}

fn c8_loss_of_derivatives() -> Outcome {
    let r = verify::loss_of_derivatives(&models::wave_neumann(2).unwrap(), &Tolerances::default());
    Outcome::new(r.passed, r.detail)
}

fn c9_inequalities() -> Outcome {
    let wave_identity = [verify::wave_identity(2, 100_000, 7), verify::wave_identity(3, 100_000, 7)];
    let re = verify::re_sqrt(1_000_000, 7);
    let mx = verify::maxwell_chain(1.0, 1.0, 100_000, 7).unwrap();
    let all = wave_identity.iter().chain([&re, &mx]);
    let passed = all.clone().all(|r| r.passed && r.violations == 0);
    let detail = all
        .map(|r| format!("{}[n={} v={}]", r.name, r.samples, r.violations))
        .collect::<Vec<_>>()
        .join(" ");
    Outcome::new(passed, format!("{detail} {}", mx.detail))
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let o = Command::new(env!("CARGO_BIN_EXE_hypbc")).args(args).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o.stdout
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut same = true;
    let mut sizes = vec![];
    for (tag, args) in [
        ("power", vec!["power", "--preset", "maxwell", "--seed", "11"]),
        (
            "sweep",
            vec![
                "solve",
                "--preset",
                "acoustic_control",
                "--grid",
                "32,32,64",
                "--gamma-sweep",
                "--gamma-count",
                "3",
            ],
        ),
    ] {
        let paths = [dir.path().join(format!("{tag}_a.csv")), dir.path().join(format!("{tag}_b.csv"))];
        let mut outs = vec![];
        for p in &paths {
            let mut a = args.clone();
            a.extend(["--csv", p.to_str().unwrap()]);
            let stdout = run_cli(&a);
            outs.push((std::fs::read(p).unwrap(), stdout));
        }
        same &= outs[0] == outs[1];
        sizes.push(format!("{tag}={}B", outs[0].0.len()));
    }
    Outcome::new(same, format!("byte_identical={same} {}", sizes.join(" ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("wave/Neumann power 1/2", c1_wave_power),
        ("oblique power 1 and worst-case sequence", c2_oblique),
        ("Maxwell power 1, mu=2, kernel inclusion, not uniform", c3_maxwell),
        ("symmetric positive control", c4_positive_control),
        ("resolvent bound", c5_resolvent),
        ("projector suite", c6_projector),
        ("solver correctness", c7_solver),
        ("loss of derivatives in the weighted estimate", c8_loss_of_derivatives),
        ("inequality suites", c9_inequalities),
        ("determinism", c10_determinism),
    ];
    let mut unexpected = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        let start = Instant::now();
        let o = run();
        let status = if o.passed { "PASS" } else { "FAIL" };
        let note = if !o.passed && KNOWN_RED.contains(&id) {
            if o.expected {
                " [known unattainable; asymptote confirmed]"
            } else {
                " [known unattainable; asymptote NOT confirmed]"
            }
        } else {
            ""
        };
        println!(
            "{status} criterion {id} ({name}): {} [{:.1}s]{note}",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        let ok = if KNOWN_RED.contains(&id) { o.expected } else { o.passed };
        unexpected += usize::from(!ok);
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected acceptance failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
