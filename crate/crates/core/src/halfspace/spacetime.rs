use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hyperbolic::{Frequency, HyperbolicSystem};
use crate::io::GridField;
use crate::linalg::{C64, CMat, CVec};
use crate::lopatinskii::BoundaryOperator;
use crate::parallel;

use super::fft::{fft_axes, Lattice};
use super::frequency::{solve_with_context, FrequencyContext, FrequencyProblem, SolverOptions, XGrid};

/// Largest fraction of tangential bins allowed to fail before the solve is
/// rejected.
const FAILURE_LIMIT: f64 = 1e-3;

/// Uniform grid on `[0, T) x [0, Y_1) x .. x [0, x_max]`, periodic in the
/// tangential directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    pub nt: usize,
    pub dt: f64,
    pub ny: Vec<usize>,
    pub dy: Vec<f64>,
    pub x: XGrid,
}

impl SpaceTimeGrid {
    pub fn new(nt: usize, dt: f64, ny: Vec<usize>, dy: Vec<f64>, x: XGrid) -> Result<Self> {
        if nt < 2 || !(dt > 0.0) || ny.len() != dy.len() || ny.iter().any(|&n| n < 1) || dy.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::InvalidInput("space-time grid needs nt >= 2 and positive spacings".into()));
        }
        Ok(Self { nt, dt, ny, dy, x })
    }

    /// Tangential dimensions `(t, y_1, ..)`.
    pub fn tangential_dims(&self) -> Vec<usize> {
        std::iter::once(self.nt).chain(self.ny.iter().copied()).collect()
    }

    pub fn tangential_spacings(&self) -> Vec<f64> {
        std::iter::once(self.dt).chain(self.dy.iter().copied()).collect()
    }

    pub fn interior_dims(&self) -> Vec<usize> {
        let mut d = self.tangential_dims();
        d.push(self.x.n);
        d
    }

    pub fn interior_spacings(&self) -> Vec<f64> {
        let mut s = self.tangential_spacings();
        s.push(self.x.h);
        s
    }

    pub fn t(&self, k: usize) -> f64 {
        self.dt * k as f64
    }

    pub fn extent_t(&self) -> f64 {
        self.dt * self.nt as f64
    }

    /// `y` multi-index and `x` index of an interior point.
    fn split(&self, point: usize) -> (usize, Vec<usize>, usize) {
        let mut rem = point;
        let j = rem % self.x.n;
        rem /= self.x.n;
        let mut y = vec![0; self.ny.len()];
        for a in (0..self.ny.len()).rev() {
            y[a] = rem % self.ny[a];
            rem /= self.ny[a];
        }
        (rem, y, j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub max_trace_residual: f64,
    /// Relative mismatch between the spectral and the grid energy of `w`.
    pub parseval_rel_error: f64,
    /// `max |w|` over the first 5% of time steps relative to `max |w|`;
    /// large values signal wrap-around of the periodic time transform.
    pub leading_slab: f64,
}

/// Solution stored as `w = e^{-gamma t} u`, which is what the estimates
/// control and what stays bounded for large `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceSolution {
    pub gamma: f64,
    pub weighted: GridField,
    /// `e^{-gamma t} u(t, y, 0)`.
    pub trace: GridField,
    /// `e^{-gamma t} A^d u(t, y, 0)`.
    pub weighted_trace: GridField,
    /// Tangential bins that failed and were set to zero.
    pub failures: usize,
    pub diagnostics: SolveDiagnostics,
}

impl HalfspaceSolution {
    /// `u = e^{gamma t} w`.
    pub fn unweighted(&self) -> GridField {
        scale_time(&self.weighted, self.gamma)
    }
}

fn scale_time(field: &GridField, rate: f64) -> GridField {
    let mut out = field.clone();
    let per_t = field.data.len() / field.dims[0];
    for k in 0..field.dims[0] {
        let w = (rate * field.spacings[0] * k as f64).exp();
        for z in &mut out.data[k * per_t..(k + 1) * per_t] {
            *z *= w;
        }
    }
    out
}

fn check_field(field: &GridField, dims: &[usize], comps: usize, what: &str) -> Result<()> {
    if field.dims != dims || field.components != comps || field.data.len() != comps * dims.iter().product::<usize>() {
        return Err(Error::InvalidInput(format!(
            "{what} has shape {:?} x {}, expected {:?} x {comps}",
            field.dims, field.components, dims
        )));
    }
    Ok(())
}

/// Solves `A^0 u_t + sum A^j u_{y_j} + A^d u_x = f`, `B u(0) = g` on the
/// grid by transforming `e^{-gamma t} f` and `e^{-gamma t} g` in `(t, y)`
/// and solving the boundary-value ODE bin by bin.
pub fn solve(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    grid: &SpaceTimeGrid,
    f: &GridField,
    g: &GridField,
    gamma: f64,
    opts: &SolverOptions,
    tol: &Tolerances,
) -> Result<HalfspaceSolution> {
    if !(gamma >= tol.gamma_floor) {
        return Err(Error::InvalidInput(format!(
            "gamma = {gamma} is below the floor {}",
            tol.gamma_floor
        )));
    }
    if grid.ny.len() + 1 != system.d {
        return Err(Error::InvalidInput(format!(
            "grid has {} tangential space axes, system needs {}",
            grid.ny.len(),
            system.d - 1
        )));
    }
    let n = system.n;
    let mu = b.mu();
    let tdims = grid.tangential_dims();
    let idims = grid.interior_dims();
    check_field(f, &idims, n, "interior data")?;
    check_field(g, &tdims, mu, "boundary data")?;

    let lattice = Lattice::new(tdims.clone(), grid.tangential_spacings());
    let axes: Vec<usize> = (0..tdims.len()).collect();
    let mut fw = scale_time(f, -gamma).data;
    let mut gw = scale_time(g, -gamma).data;
    fft_axes(&mut fw, &idims, n, &axes, false);
    fft_axes(&mut gw, &tdims, mu, &axes, false);

    let nx = grid.x.n;
    let inner = nx * n;
    let ad = system.ad();
    let results = parallel::map_indexed(lattice.len(), |bin| -> Result<(CMat, f64)> {
        let tang = lattice.frequency(bin);
        let freq = Frequency::new(tang[0], tang[1..].to_vec(), gamma)?;
        let slice = &fw[bin * inner..(bin + 1) * inner];
        let f_hat = CMat::from_fn(n, nx, |c, j| slice[j * n + c]);
        let g_hat = CVec::from_fn(mu, |c, _| gw[bin * mu + c]);
        if f_hat.iter().all(|z| z.norm_sqr() == 0.0) && g_hat.iter().all(|z| z.norm_sqr() == 0.0) {
            return Ok((CMat::zeros(n, nx), 0.0));
        }
        let ctx = FrequencyContext::new(system, b, &freq, tol)?;
        let problem = FrequencyProblem {
            freq,
            grid: grid.x,
            f_hat,
            g_hat,
        };
        let sol = solve_with_context(&ctx, ad, &problem, opts, tol)?;
        Ok((sol.u, sol.trace_residual))
    });

    let total = results.len();
    let mut failures = 0;
    let mut first: Option<(usize, String)> = None;
    let mut max_trace_residual = 0.0_f64;
    let mut spec = vec![C64::new(0.0, 0.0); fw.len()];
    let mut spectral_energy = 0.0;
    for (bin, r) in results.into_iter().enumerate() {
        match r {
            Ok((u, res)) => {
                max_trace_residual = max_trace_residual.max(res);
                for j in 0..nx {
                    for c in 0..n {
                        let v = u[(c, j)];
                        spectral_energy += v.norm_sqr();
                        spec[bin * inner + j * n + c] = v;
                    }
                }
            }
            Err(e) => {
                failures += 1;
                if first.is_none() {
                    first = Some((bin, e.to_string()));
                }
            }
        }
    }
    if failures > 0 && failures as f64 > FAILURE_LIMIT * total as f64 {
        let (bin, msg) = first.expect("a failure was recorded");
        return Err(Error::SolverFailures {
            failed: failures,
            total,
            limit_fraction: FAILURE_LIMIT * 100.0,
            first_frequency: lattice.frequency(bin),
            first_error: msg,
        });
    }
    spectral_energy *= lattice.parseval_factor() * grid.x.h;

    fft_axes(&mut spec, &idims, n, &axes, true);
    let norm = 1.0 / lattice.len() as f64;
    for z in &mut spec {
        *z *= norm;
    }
    let weighted = GridField {
        components: n,
        dims: idims.clone(),
        spacings: grid.interior_spacings(),
        gamma,
        data: spec,
    };
    let grid_energy = weighted.l2_norm_sqr();
    let parseval_rel_error = if spectral_energy > 0.0 {
        (grid_energy - spectral_energy).abs() / spectral_energy
    } else {
        0.0
    };

    let mut trace = GridField::zeros(n, tdims.clone(), grid.tangential_spacings(), gamma);
    let mut weighted_trace = trace.clone();
    for p in 0..lattice.len() {
        let v = CVec::from_fn(n, |c, _| weighted.data[p * inner + c]);
        let av = ad * &v;
        for c in 0..n {
            trace.set(p, c, v[c]);
            weighted_trace.set(p, c, av[c]);
        }
    }

    let per_t = weighted.data.len() / grid.nt;
    let slab = (grid.nt / 20).max(1);
    let peak = weighted.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead = weighted.data[..slab * per_t].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let leading_slab = if peak > 0.0 { lead / peak } else { 0.0 };

    Ok(HalfspaceSolution {
        gamma,
        weighted,
        trace,
        weighted_trace,
        failures,
        diagnostics: SolveDiagnostics {
            max_trace_residual,
            parseval_rel_error,
            leading_slab,
        },
    })
}

/// Smooth pulse `u = w phi(t) prod psi(y_j) e^{-x}` with Gaussian profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub t_centre: f64,
    pub t_width: f64,
    /// Width in `y` as a fraction of the period.
    pub y_width: f64,
}

impl Pulse {
    /// Centred in the window with widths of a sixteenth of each period.
    pub fn centred(grid: &SpaceTimeGrid) -> Self {
        let t = grid.extent_t();
        Self {
            t_centre: t / 2.0,
            t_width: t / 16.0,
            y_width: 1.0 / 16.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manufactured {
    pub f: GridField,
    pub g: GridField,
    pub exact: GridField,
}

/// Data with known solution for systems with coefficient matrices and a
/// constant boundary matrix.
pub fn manufactured_spacetime(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    grid: &SpaceTimeGrid,
    w: &CVec,
    pulse: &Pulse,
) -> Result<Manufactured> {
    let a = system
        .matrices()
        .ok_or_else(|| Error::InvalidInput("manufactured data needs coefficient matrices".into()))?;
    let bm = b
        .as_constant()
        .ok_or_else(|| Error::InvalidInput("manufactured data needs a constant boundary matrix".into()))?;
    if w.len() != system.n || grid.ny.len() + 1 != system.d {
        return Err(Error::InvalidInput("amplitude or grid does not match the system".into()));
    }
    let n = system.n;
    let d = system.d;
    let aw: Vec<CVec> = a.iter().map(|m| m * w).collect();
    let gauss = |z: f64, c: f64, s: f64| {
        let q = (z - c) / s;
        let v = (-0.5 * q * q).exp();
        (v, -q / s * v)
    };
    let idims = grid.interior_dims();
    let mut f = GridField::zeros(n, idims.clone(), grid.interior_spacings(), 0.0);
    let mut exact = f.clone();
    for p in 0..f.points() {
        let (k, y, j) = grid.split(p);
        let (phi, dphi) = gauss(grid.t(k), pulse.t_centre, pulse.t_width);
        let psi: Vec<(f64, f64)> = (0..d - 1)
            .map(|a| {
                let period = grid.ny[a] as f64 * grid.dy[a];
                gauss(y[a] as f64 * grid.dy[a], period / 2.0, pulse.y_width * period)
            })
            .collect();
        let prod: f64 = psi.iter().map(|v| v.0).product();
        let ex = (-grid.x.x(j)).exp();
        let base = phi * prod * ex;
        let mut v = &aw[0] * C64::new(dphi * prod * ex, 0.0) - &aw[d] * C64::new(base, 0.0);
        for a_idx in 0..d - 1 {
            let others: f64 = psi.iter().enumerate().filter(|(i, _)| *i != a_idx).map(|(_, v)| v.0).product();
            v += &aw[a_idx + 1] * C64::new(phi * psi[a_idx].1 * others * ex, 0.0);
        }
        for c in 0..n {
            f.set(p, c, v[c]);
            exact.set(p, c, w[c] * base);
        }
    }
    let tdims = grid.tangential_dims();
    let mut g = GridField::zeros(bm.nrows(), tdims, grid.tangential_spacings(), 0.0);
    let bw = bm * w;
    let k = (0..n).max_by(|&i, &j| w[i].norm().total_cmp(&w[j].norm())).expect("nonempty amplitude");
    for p in 0..g.points() {
        // exact(t, y, 0) = w * phi * prod psi.
        let s = exact.get(p * grid.x.n, k) / w[k];
        for c in 0..bm.nrows() {
            g.set(p, c, bw[c] * s);
        }
    }
    Ok(Manufactured { f, g, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn manufactured_pulse_acoustic() {
        let preset = models::acoustic_control().unwrap();
        let tol = Tolerances::default();
        let x = XGrid::with_extent(16.0, 128).unwrap();
        let grid = SpaceTimeGrid::new(32, 0.25, vec![32], vec![0.5], x).unwrap();
        let w = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(-0.25, 0.0)]);
        let m = manufactured_spacetime(&preset.system, &preset.b, &grid, &w, &Pulse::centred(&grid)).unwrap();
        let sol = solve(&preset.system, &preset.b, &grid, &m.f, &m.g, 1.0, &SolverOptions::default(), &tol).unwrap();
        let u = sol.unweighted();
        let err: f64 = u.data.iter().zip(&m.exact.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = m.exact.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert_eq!(sol.failures, 0);
        assert!(err / scale < 5e-2, "relative error {}", err / scale);
        assert!(sol.diagnostics.parseval_rel_error < 1e-10);
    }
}
