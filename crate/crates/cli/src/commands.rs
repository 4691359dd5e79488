use std::path::{Path, PathBuf};

use clap::Args;

use hypbc::halfspace::{
    manufactured_spacetime, solve as solve_halfspace, verify_weighted_estimate, EstimateMode, HalfspaceSolution, Pulse,
    SolverOptions, SpaceTimeGrid, XGrid,
};
use hypbc::hyperbolic::classify as classify_system;
use hypbc::io::{csv, export_preset, fmt_num, read_spec_file, GridField};
use hypbc::lopatinskii::estimate_power;
use hypbc::models::{self, Preset};
use hypbc::sampling::geometric_grid;
use hypbc::verify::{default_properties, run_property, SuiteSizes};
use hypbc::{CVec, Error, Tolerances, C64};

use crate::{Common, Failure, GammaGrid, Source};

type Outcome = std::result::Result<(), Failure>;

fn load(source: &Source, tol: &Tolerances) -> Result<Preset, Error> {
    match (&source.spec, &source.preset) {
        (Some(path), None) => {
            let spec = read_spec_file(path)?;
            let (system, b) = spec.build(&path.display().to_string(), tol)?;
            Ok(models::infer_preset(system, b))
        }
        (None, Some(name)) => models::preset_by_name(name),
        _ => Err(Error::InvalidInput("give a spec file or --preset <name>".into())),
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn classify(source: &Source, common: &Common) -> Outcome {
    let tol = Tolerances::default();
    let preset = load(source, &tol)?;
    let c = match classify_system(&preset.system, common.samples.unwrap_or(200), common.seed, &tol) {
        Err(e @ Error::NotHyperbolic { .. }) => return Err(Failure::NotHyperbolic(e.to_string())),
        other => other?,
    };
    let kind = if c.symmetric {
        "symmetric hyperbolic"
    } else if c.strictly_hyperbolic {
        "strictly hyperbolic"
    } else if c.constantly_hyperbolic {
        "constantly hyperbolic"
    } else {
        "hyperbolic (variable multiplicity)"
    };
    let boundary = if c.characteristic_boundary {
        "characteristic"
    } else {
        "non-characteristic"
    };
    println!("{kind}, {boundary} boundary, μ={}", c.mu);
    println!("[classification]");
    println!("name={}", preset.system.name);
    println!("d={}", preset.system.d);
    println!("N={}", preset.system.n);
    println!("mu={}", c.mu);
    println!("symmetric={}", c.symmetric);
    println!("constantly_hyperbolic={}", c.constantly_hyperbolic);
    println!("strictly_hyperbolic={}", c.strictly_hyperbolic);
    println!("characteristic_boundary={}", c.characteristic_boundary);
    for (k, v) in &c.diagnostics {
        println!("{k}={}", fmt_num(*v));
    }
    Ok(())
}

fn gamma_values(g: &GammaGrid, min: f64, max: f64, count: usize) -> Vec<f64> {
    geometric_grid(
        g.gamma_min.unwrap_or(min),
        g.gamma_max.unwrap_or(max),
        g.gamma_count.unwrap_or(count),
    )
}

pub fn power(source: &Source, common: &Common, gammas: &GammaGrid, out: Option<&Path>) -> Outcome {
    let tol = Tolerances::default();
    let preset = load(source, &tol)?;
    let grid = gamma_values(gammas, 1e-4, 1e-1, 12);
    let plan = preset.sampling_plan(common.samples.unwrap_or(200), common.seed);
    let est = estimate_power(&preset.system, &preset.b, &grid, &plan, &tol)?;
    let mut header = vec!["gamma".to_string(), "rho_min".into(), "tau_worst".into()];
    header.extend((1..preset.system.d).map(|k| format!("eta_worst_{k}")));
    let rows: Vec<Vec<String>> = est
        .per_gamma_rho
        .iter()
        .zip(&est.worst_frequencies)
        .map(|((g, r), f)| {
            let mut row = vec![fmt_num(*g), fmt_num(*r), fmt_num(f.tau)];
            row.extend(f.eta.iter().map(|e| fmt_num(*e)));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_or_print(out, &csv(&header, &rows))?;
    println!(
        "s_hat={} raw_slope={} r2={} fit_range=[{}, {}]",
        fmt_num(est.s_hat),
        fmt_num(est.raw_slope),
        fmt_num(est.regression_r2),
        fmt_num(est.fit_range.0),
        fmt_num(est.fit_range.1)
    );
    if let Some(w) = &est.fit_warning {
        eprintln!("warning: {w}");
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: Source,
    /// Interior forcing as a grid-field file on (t, y.., x).
    #[arg(long)]
    pub f: Option<PathBuf>,
    /// Boundary datum as a grid-field file on (t, y..).
    #[arg(long)]
    pub g: Option<PathBuf>,
    /// Points per axis: nt, ny.., nx.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Window lengths per axis: T, Y.., L.
    #[arg(long, value_delimiter = ',')]
    pub extent: Option<Vec<f64>>,
    /// Laplace weight of the single solve.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Sobolev index of the boundary norm.
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Shifted norms: data measured in H^{-s}, solution in L2.
    #[arg(long)]
    pub shifted: bool,
    /// Build data with a known solution and report the recovery error.
    #[arg(long)]
    pub manufactured: bool,
    /// Repeat the solve over the gamma grid and print a ratio table.
    #[arg(long)]
    pub gamma_sweep: bool,
    #[command(flatten)]
    pub gammas: GammaGrid,
    /// Solution output (grid-field file).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ratio table output for --gamma-sweep.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Default grid for a `d`-dimensional problem: 64 points per tangential axis
/// and 128 in `x`.
fn default_grid(d: usize) -> (Vec<usize>, Vec<f64>) {
    let mut n = vec![64; d];
    n.push(128);
    let mut e = vec![8.0];
    e.extend(std::iter::repeat_n(16.0, d - 1));
    e.push(16.0);
    (n, e)
}

fn grid_from(args: &SolveArgs, d: usize) -> Result<SpaceTimeGrid, Error> {
    let (dn, de) = default_grid(d);
    let n = args.grid.clone().unwrap_or(dn);
    let e = args.extent.clone().unwrap_or(de);
    if n.len() != d + 1 || e.len() != d + 1 {
        return Err(Error::InvalidInput(format!(
            "--grid and --extent need {} entries (t, y.., x)",
            d + 1
        )));
    }
    let x = XGrid::with_extent(e[d], n[d])?;
    SpaceTimeGrid::new(
        n[0],
        e[0] / n[0] as f64,
        n[1..d].to_vec(),
        (1..d).map(|k| e[k] / n[k] as f64).collect(),
        x,
    )
}

/// Grid implied by the data files; `--grid`/`--extent` fill in `x` when
/// only a boundary datum is given.
fn grid_from_files(args: &SolveArgs, d: usize, f: Option<&GridField>, g: &GridField) -> Result<SpaceTimeGrid, Error> {
    if g.dims.len() != d {
        return Err(Error::InvalidInput(format!(
            "boundary datum has {} axes, expected {d}",
            g.dims.len()
        )));
    }
    let x = match f {
        Some(f) => {
            if f.dims.len() != d + 1 || f.dims[..d] != g.dims[..] {
                return Err(Error::InvalidInput("forcing and boundary grids are incompatible".into()));
            }
            XGrid::new(f.spacings[d], f.dims[d])?
        }
        None => {
            let fallback = grid_from(args, d)?;
            fallback.x
        }
    };
    SpaceTimeGrid::new(g.dims[0], g.spacings[0], g.dims[1..].to_vec(), g.spacings[1..].to_vec(), x)
}

/// Boundary pulse used when no data is given: a Gaussian in `t` and `y`
/// on every boundary row.
fn pulse_datum(grid: &SpaceTimeGrid, mu: usize) -> GridField {
    let p = Pulse::centred(grid);
    let mut g = GridField::zeros(mu, grid.tangential_dims(), grid.tangential_spacings(), 0.0);
    let per_t: usize = grid.ny.iter().product();
    for k in 0..grid.nt {
        let phi = (-0.5 * ((grid.t(k) - p.t_centre) / p.t_width).powi(2)).exp();
        for r in 0..per_t {
            let mut psi = 1.0;
            let mut rest = r;
            for a in (0..grid.ny.len()).rev() {
                let j = rest % grid.ny[a];
                rest /= grid.ny[a];
                let y = (j as f64 / grid.ny[a] as f64 - 0.5) / p.y_width;
                psi *= (-0.5 * y * y).exp();
            }
            for c in 0..mu {
                g.set(k * per_t + r, c, C64::new(phi * psi, 0.0));
            }
        }
    }
    g
}

struct Problem {
    grid: SpaceTimeGrid,
    f: GridField,
    g: GridField,
    exact: Option<GridField>,
}

fn build_problem(args: &SolveArgs, preset: &Preset) -> Result<Problem, Error> {
    let sys = &preset.system;
    let d = sys.d;
    if args.manufactured {
        let grid = grid_from(args, d)?;
        let w = CVec::from_fn(sys.n, |i, _| C64::new(1.0 / (1.0 + i as f64), 0.25 * i as f64));
        let m = manufactured_spacetime(sys, &preset.b, &grid, &w, &Pulse::centred(&grid))?;
        return Ok(Problem {
            grid,
            f: m.f,
            g: m.g,
            exact: Some(m.exact),
        });
    }
    let f = args.f.as_deref().map(GridField::read).transpose()?;
    let g = args.g.as_deref().map(GridField::read).transpose()?;
    let (grid, g) = match g {
        Some(g) => (grid_from_files(args, d, f.as_ref(), &g)?, g),
        None => {
            let grid = match &f {
                Some(f) if f.dims.len() == d + 1 => SpaceTimeGrid::new(
                    f.dims[0],
                    f.spacings[0],
                    f.dims[1..d].to_vec(),
                    f.spacings[1..d].to_vec(),
                    XGrid::new(f.spacings[d], f.dims[d])?,
                )?,
                Some(_) => return Err(Error::InvalidInput("forcing grid does not match the system".into())),
                None => grid_from(args, d)?,
            };
            let g = if f.is_some() {
                GridField::zeros(preset.b.mu(), grid.tangential_dims(), grid.tangential_spacings(), 0.0)
            } else {
                pulse_datum(&grid, preset.b.mu())
            };
            (grid, g)
        }
    };
    let f = f.unwrap_or_else(|| GridField::zeros(sys.n, grid.interior_dims(), grid.interior_spacings(), 0.0));
    Ok(Problem { grid, f, g, exact: None })
}

fn run_solve(preset: &Preset, p: &Problem, gamma: f64, tol: &Tolerances) -> Result<HalfspaceSolution, Error> {
    solve_halfspace(
        &preset.system,
        &preset.b,
        &p.grid,
        &p.f,
        &p.g,
        gamma,
        &SolverOptions::default(),
        tol,
    )
}

/// Relative error of the weighted solution against `e^{-gamma t}` times the exact field.
fn recovery_error(sol: &HalfspaceSolution, exact: &GridField) -> f64 {
    let per_t = exact.data.len() / exact.dims[0];
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (a, b)) in sol.weighted.data.iter().zip(&exact.data).enumerate() {
        let w = (-sol.gamma * exact.spacings[0] * (i / per_t) as f64).exp();
        num += (a - b * w).norm_sqr();
        den += (b * w).norm_sqr();
    }
    (num / den).sqrt()
}

pub fn solve(args: &SolveArgs) -> Outcome {
    let tol = Tolerances::default();
    let preset = load(&args.source, &tol)?;
    let problem = build_problem(args, &preset)?;
    let mode = if args.shifted {
        EstimateMode::Shifted
    } else {
        EstimateMode::Standard
    };
    if args.gamma_sweep {
        let gammas = gamma_values(&args.gammas, tol.gamma_floor, 16.0 * tol.gamma_floor, 5);
        let mut rows = Vec::new();
        for &gamma in &gammas {
            let sol = run_solve(&preset, &problem, gamma, &tol)?;
            let r = verify_weighted_estimate(&sol, &problem.f, &problem.g, args.s, mode)?;
            rows.push(vec![fmt_num(gamma), fmt_num(r.lhs), fmt_num(r.rhs), fmt_num(r.ratio)]);
        }
        write_or_print(args.csv.as_deref(), &csv(&["gamma", "lhs", "rhs", "ratio"], &rows))?;
        return Ok(());
    }
    let sol = run_solve(&preset, &problem, args.gamma, &tol)?;
    let r = verify_weighted_estimate(&sol, &problem.f, &problem.g, args.s, mode)?;
    println!("lhs={} rhs={} ratio={}", fmt_num(r.lhs), fmt_num(r.rhs), fmt_num(r.ratio));
    println!(
        "failures={} max_trace_residual={} parseval_rel_error={} leading_slab={}",
        sol.failures,
        fmt_num(sol.diagnostics.max_trace_residual),
        fmt_num(sol.diagnostics.parseval_rel_error),
        fmt_num(sol.diagnostics.leading_slab)
    );
    if let Some(exact) = &problem.exact {
        println!("recovery_error={}", fmt_num(recovery_error(&sol, exact)));
    }
    if let Some(out) = &args.out {
        sol.unweighted().write(out)?;
    }
    Ok(())
}

pub fn verify(source: &Source, common: &Common, only: &[String]) -> Outcome {
    let tol = Tolerances::default();
    let preset = load(source, &tol)?;
    let mut sizes = SuiteSizes::default();
    if let Some(n) = common.samples {
        sizes.samples = n;
        sizes.inequality_samples = sizes.inequality_samples.max(n);
    }
    let names: Vec<String> = if only.is_empty() {
        default_properties(&preset).into_iter().map(String::from).collect()
    } else {
        only.to_vec()
    };
    let mut failed = 0;
    for name in &names {
        let r = run_property(name, &preset, sizes, common.seed, &tol)?;
        println!("{r}");
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        return Err(Failure::Property(failed));
    }
    Ok(())
}

pub fn preset(
    name: &str,
    out: Option<&Path>,
    d: Option<usize>,
    b: Option<Vec<f64>>,
    eps: Option<f64>,
    mu: Option<f64>,
) -> Outcome {
    let preset = match name {
        "wave_neumann" => models::wave_neumann(d.unwrap_or(2))?,
        "wave_oblique" => {
            let d = d.unwrap_or_else(|| b.as_ref().map_or(2, |b| b.len() + 1));
            let b = b.unwrap_or_else(|| vec![1.0; d - 1]);
            models::wave_oblique(d, &b)?
        }
        "maxwell" => models::maxwell(eps.unwrap_or(1.0), mu.unwrap_or(1.0))?,
        other => models::preset_by_name(other)?,
    };
    let text = export_preset(&preset, &preset.b.params());
    write_or_print(out, &text)?;
    Ok(())
}
