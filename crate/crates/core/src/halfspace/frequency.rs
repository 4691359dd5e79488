use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::algebra::{contour_from_spectrum, pencil_eigen, PencilDecomposition, SpectralProjection};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hyperbolic::{build_g, Frequency, HyperbolicSystem};
use crate::linalg::{self, C64, CMat, CVec, I};
use crate::lopatinskii::BoundaryOperator;

/// Uniform normal grid `x_j = j h`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XGrid {
    pub h: f64,
    pub n: usize,
}

impl XGrid {
    pub fn new(h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) || n < 2 {
            return Err(Error::InvalidInput(format!("x grid needs h > 0 and n >= 2 (h={h}, n={n})")));
        }
        Ok(Self { h, n })
    }

    /// Grid of `n` points covering `[0, extent]`.
    pub fn with_extent(extent: f64, n: usize) -> Result<Self> {
        Self::new(extent / (n.max(2) - 1) as f64, n)
    }

    pub fn extent(&self) -> f64 {
        self.h * (self.n - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.h * j as f64
    }

    /// Twenty decay lengths of the slowest finite mode with 512 points,
    /// refined when the fastest mode would be under-resolved.
    pub fn default_for(decomp: &PencilDecomposition) -> Self {
        let slow = decomp
            .finite
            .iter()
            .map(|(z, _)| z.re.abs())
            .fold(f64::INFINITY, f64::min);
        let fast = decomp.finite.iter().map(|(z, _)| z.norm()).fold(0.0, f64::max);
        let slow = if slow.is_finite() && slow > 0.0 { slow } else { 1.0 };
        let extent = 20.0 / slow;
        let n = ((2.0 * extent * fast).ceil() as usize + 1).clamp(512, 8192);
        Self::with_extent(extent, n).expect("positive extent")
    }

    /// Same extent with spacing at most `max_h`, for forcing that varies on
    /// a fixed length scale.
    pub fn refined(self, max_h: f64) -> Self {
        let extent = self.extent();
        let n = self.n.max((extent / max_h).ceil() as usize + 1).min(1 << 16);
        Self::with_extent(extent, n).expect("positive extent")
    }

    /// Trapezoidal `int |U|^2 dx` of an `N x n` profile.
    pub fn l2_sqr(&self, profile: &CMat) -> f64 {
        let n = profile.ncols();
        let total: f64 = profile.iter().map(|z| z.norm_sqr()).sum();
        let ends: f64 = profile.column(0).norm_squared() + profile.column(n - 1).norm_squared();
        self.h * (total - 0.5 * ends)
    }
}

/// How the forcing is continued to `x_d < 0` before the transform in `x_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Zero continuation with twofold padding.
    Zero,
    /// Reflection matching derivatives at the boundary, tapered to zero,
    /// with fourfold padding. Spectrally accurate for smooth forcing.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub extension: Extension,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            extension: Extension::Smooth,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProblem {
    pub freq: Frequency,
    pub grid: XGrid,
    /// `N x n`: column `j` is the forcing at `x_j`.
    pub f_hat: CMat,
    pub g_hat: CVec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySolution {
    pub grid: XGrid,
    pub u: CMat,
    pub u1: CMat,
    pub u2: CMat,
    pub trace: CVec,
    pub weighted_trace: CVec,
    /// `|B U(0) - g| / max(|g|, |B U_1(0)|)`.
    pub trace_residual: f64,
}

/// Per-frequency data shared by the constituent solves.
#[derive(Debug, Clone)]
pub struct FrequencyContext {
    pub freq: Frequency,
    pub g: CMat,
    pub b: CMat,
    pub decomp: PencilDecomposition,
    pub projection: SpectralProjection,
    /// `J^H (J J^H)^{-1}` with `J = B Pi`.
    pub lift: CMat,
}

impl FrequencyContext {
    pub fn new(system: &HyperbolicSystem, b: &BoundaryOperator, freq: &Frequency, tol: &Tolerances) -> Result<Self> {
        let g = build_g(system, freq);
        let decomp = pencil_eigen(system.ad(), &g, tol)?;
        if decomp.mu != b.mu() {
            return Err(Error::InvalidInput(format!(
                "boundary operator has {} rows but dim E^s = {}",
                b.mu(),
                decomp.mu
            )));
        }
        let contour = contour_from_spectrum(&decomp, tol)?;
        let projection = SpectralProjection::new(system.ad(), &g, &contour, tol)?;
        let bm = b.matrix_at(freq);
        let j = &bm * &projection.projector;
        let s = linalg::singular_values(&j);
        let hi = s.first().copied().unwrap_or(0.0);
        let lo = s.get(decomp.mu.saturating_sub(1)).copied().unwrap_or(0.0);
        let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        if !(ratio >= tol.j_rank) {
            return Err(Error::RankDeficientJ {
                ratio,
                threshold: tol.j_rank,
            });
        }
        let jjh = &j * j.adjoint();
        let lift = j.adjoint() * linalg::inverse(&jjh, tol.singular)?;
        Ok(Self {
            freq: freq.clone(),
            g,
            b: bm,
            decomp,
            projection,
            lift,
        })
    }

    /// `U_2(x_j) = T(x_j) J^H (J J^H)^{-1} r`.
    pub fn u2(&self, r: &CVec, grid: &XGrid, tol: &Tolerances) -> Result<CMat> {
        let c = &self.lift * r;
        let cols = self.projection.propagate_grid(&c, grid.h, grid.n, tol)?;
        Ok(CMat::from_columns(&cols))
    }
}

/// Coefficients `c_j` with `sum_j c_j j^k = (-1)^k`, `k < m`, so that
/// `sum_j c_j f(j x)` continues `f` to `-x` with `m - 1` matching derivatives.
fn reflection_coefficients(m: usize) -> Vec<f64> {
    (1..=m)
        .map(|j| {
            (1..=m)
                .filter(|&i| i != j)
                .map(|i| (-1.0 - i as f64) / (j as f64 - i as f64))
                .product()
        })
        .collect()
}

/// Points used to the left of the boundary and the matching order.
fn extension_layout(n: usize) -> (usize, usize) {
    const SPAN: usize = 36;
    if n - 1 >= SPAN {
        (SPAN, ((n - 1) / SPAN).clamp(1, 6))
    } else {
        (n - 1, 1)
    }
}

fn extended_line(row: &[C64], ext: Extension, len: usize) -> Vec<C64> {
    let n = row.len();
    let mut buf = vec![C64::new(0.0, 0.0); len];
    buf[..n].copy_from_slice(row);
    if ext == Extension::Smooth {
        let (span, m) = extension_layout(n);
        let coef = reflection_coefficients(m);
        // erfc taper: one near the boundary, negligible past `span` points.
        let width = span as f64 / 12.0;
        let centre = span as f64 / 2.0;
        for i in 1..=span {
            let chi = 0.5 * libm::erfc((i as f64 - centre) / width);
            let mut v = C64::new(0.0, 0.0);
            for (j, c) in coef.iter().enumerate() {
                let idx = (j + 1) * i;
                if idx < n {
                    v += row[idx] * *c;
                }
            }
            buf[len - i] = v * chi;
        }
    }
    buf
}

fn u1_with(ad: &CMat, g: &CMat, f_hat: &CMat, grid: &XGrid, ext: Extension, tol: &Tolerances) -> Result<CMat> {
    let nc = ad.nrows();
    let n = grid.n;
    if f_hat.shape() != (nc, n) {
        return Err(Error::InvalidInput(format!(
            "forcing profile must be {nc} x {n}, got {:?}",
            f_hat.shape()
        )));
    }
    if f_hat.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok(CMat::zeros(nc, n));
    }
    let len = match ext {
        Extension::Zero => (2 * n).next_power_of_two(),
        Extension::Smooth => (4 * n).next_power_of_two(),
    };
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut lines: Vec<Vec<C64>> = (0..nc)
        .map(|c| {
            let row: Vec<C64> = f_hat.row(c).iter().copied().collect();
            let mut line = extended_line(&row, ext, len);
            fwd.process(&mut line);
            line
        })
        .collect();
    let dxi = 2.0 * PI / (len as f64 * grid.h);
    let mut rhs = CVec::zeros(nc);
    for k in 0..len {
        let xi = super::fft::frequency_index(k, len) as f64 * dxi;
        let m = ad * (I * xi) - g;
        for c in 0..nc {
            rhs[c] = lines[c][k];
        }
        let sol = m.lu().solve(&rhs).filter(|v| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        let sol = sol.ok_or(Error::SingularMatrix {
            rcond: 0.0,
            threshold: tol.singular,
        })?;
        for c in 0..nc {
            lines[c][k] = sol[c];
        }
    }
    let mut out = CMat::zeros(nc, n);
    let scale = 1.0 / len as f64;
    for (c, line) in lines.iter_mut().enumerate() {
        inv.process(line);
        for j in 0..n {
            out[(c, j)] = line[j] * scale;
        }
    }
    Ok(out)
}

/// Particular solution of `A^d U' - G U = f` through the transform in `x_d`:
/// `U_1 = F^{-1} (i xi A^d - G)^{-1} F f`.
pub fn solve_u1(
    system: &HyperbolicSystem,
    freq: &Frequency,
    f_hat: &CMat,
    grid: &XGrid,
    ext: Extension,
    tol: &Tolerances,
) -> Result<CMat> {
    u1_with(system.ad(), &build_g(system, freq), f_hat, grid, ext, tol)
}

/// Decaying homogeneous solution correcting the boundary datum.
pub fn solve_u2(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    freq: &Frequency,
    g_hat: &CVec,
    u1_trace: &CVec,
    grid: &XGrid,
    tol: &Tolerances,
) -> Result<CMat> {
    let ctx = FrequencyContext::new(system, b, freq, tol)?;
    ctx.u2(&(g_hat - &ctx.b * u1_trace), grid, tol)
}

fn assemble(ctx: &FrequencyContext, ad: &CMat, u1: CMat, u2: CMat, grid: XGrid, g_hat: &CVec) -> FrequencySolution {
    let u = &u1 + &u2;
    let trace: CVec = u.column(0).into_owned();
    let bu1 = (&ctx.b * u1.column(0)).norm();
    let denom = g_hat.norm().max(bu1);
    let res = (&ctx.b * &trace - g_hat).norm();
    let trace_residual = if denom > 0.0 { res / denom } else { res };
    FrequencySolution {
        grid,
        weighted_trace: ad * &trace,
        trace,
        u,
        u1,
        u2,
        trace_residual,
    }
}

/// `U = U_1 + U_2` for one frequency.
pub fn solve_frequency(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    problem: &FrequencyProblem,
    opts: &SolverOptions,
    tol: &Tolerances,
) -> Result<FrequencySolution> {
    let ctx = FrequencyContext::new(system, b, &problem.freq, tol)?;
    solve_with_context(&ctx, system.ad(), problem, opts, tol)
}

pub(crate) fn solve_with_context(
    ctx: &FrequencyContext,
    ad: &CMat,
    problem: &FrequencyProblem,
    opts: &SolverOptions,
    tol: &Tolerances,
) -> Result<FrequencySolution> {
    if problem.g_hat.len() != ctx.b.nrows() {
        return Err(Error::InvalidInput(format!(
            "boundary datum has {} entries, expected {}",
            problem.g_hat.len(),
            ctx.b.nrows()
        )));
    }
    let u1 = u1_with(ad, &ctx.g, &problem.f_hat, &problem.grid, opts.extension, tol)?;
    let r = &problem.g_hat - &ctx.b * u1.column(0);
    let u2 = if r.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        CMat::zeros(ad.nrows(), problem.grid.n)
    } else {
        ctx.u2(&r, &problem.grid, tol)?
    };
    Ok(assemble(ctx, ad, u1, u2, problem.grid, &problem.g_hat))
}

/// Problem whose solution is `W(x) = w e^{-x}`:
/// `f = -(A^d + G) w e^{-x}`, `g = B w`. Also returns `W` on the grid.
pub fn manufactured_frequency_problem(
    system: &HyperbolicSystem,
    b: &BoundaryOperator,
    freq: &Frequency,
    w: &CVec,
    grid: XGrid,
) -> (FrequencyProblem, CMat) {
    let g = build_g(system, freq);
    let v = -(system.ad() + &g) * w;
    let mut f_hat = CMat::zeros(system.n, grid.n);
    let mut exact = CMat::zeros(system.n, grid.n);
    for j in 0..grid.n {
        let e = (-grid.x(j)).exp();
        f_hat.set_column(j, &(&v * C64::new(e, 0.0)));
        exact.set_column(j, &(w * C64::new(e, 0.0)));
    }
    let problem = FrequencyProblem {
        freq: freq.clone(),
        grid,
        f_hat,
        g_hat: b.matrix_at(freq) * w,
    };
    (problem, exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real, re};

    #[test]
    fn reflection_matches_derivatives() {
        for m in 1..=6 {
            let c = reflection_coefficients(m);
            for k in 0..m {
                let s: f64 = c.iter().enumerate().map(|(j, c)| c * ((j + 1) as f64).powi(k as i32)).sum();
                let want = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert!((s - want).abs() < 1e-9, "m={m} k={k} s={s}");
            }
        }
    }

    #[test]
    fn scalar_u1_closed_form() {
        // U' + U = e^{-2x}: decaying particular solution -e^{-2x} + C e^{-x};
        // the transform picks the one continuous across the extension.
        let sys = HyperbolicSystem::linear(
            "s",
            vec![from_real(1, 1, &[1.0]), from_real(1, 1, &[1.0])],
            &Tolerances::default(),
        )
        .unwrap();
        let f = Frequency::new(0.0, vec![], 1.0).unwrap();
        let grid = XGrid::with_extent(30.0, 1024).unwrap();
        let fh = CMat::from_fn(1, grid.n, |_, j| re((-2.0 * grid.x(j)).exp()));
        let u1 = solve_u1(&sys, &f, &fh, &grid, Extension::Smooth, &Tolerances::default()).unwrap();
        // Residual of the ODE by centred differences on the interior.
        let mut worst = 0.0_f64;
        for j in 1..grid.n * 9 / 10 {
            let d = (u1[(0, j + 1)] - u1[(0, j - 1)]) / (2.0 * grid.h);
            worst = worst.max((d + u1[(0, j)] - fh[(0, j)]).norm());
        }
        assert!(worst < 2e-3, "{worst}");
    }
}
