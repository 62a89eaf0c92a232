//! Self-checks of the solver against the exact oracles.

use crate::baselines::oned::{solution_formula_1d, sweep_1d, Schedule};
use crate::baselines::strip::oracle_strip_solve;
use crate::bench::media::point_source;
use crate::error::Result;
use crate::grid::{Field, Grid2D, Medium, PmlSpec, YBoundary};
use crate::sweep::{SolveMode, SweepContext};
use crate::C64;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

/// Strip problem: constant medium, Dirichlet rows, `w_pml = 20`.
pub struct StripCase {
    pub grid: Grid2D,
    pub medium: Medium,
    pub pml: PmlSpec,
    pub n_sub: usize,
    pub source: Field,
}

/// 200 × 60 interior at ten points per wavelength with two point sources.
pub fn strip_case() -> Result<StripCase> {
    let h = 0.01;
    let w = 20;
    let grid = Grid2D::with_interior(200, 60, h, w, YBoundary::Dirichlet)?;
    let medium = Medium::constant(&grid, 2.0 * std::f64::consts::PI * 10.0, 1.0)?;
    let mut source = point_source(&grid, grid.n_x / 3, grid.n_y / 2)?;
    source.set(2 * grid.n_x / 3 - 1, grid.n_y / 3 - 1, C64::new(0.0, 1.0 / (h * h)));
    Ok(StripCase { grid, medium, pml: PmlSpec::new(w), n_sub: 8, source })
}

/// Solver on the strip: iterations at tol 1e-6 and agreement with the
/// separable oracle at tol 1e-6 and 1e-10.
pub fn strip_checks() -> Result<Vec<CheckResult>> {
    let c = strip_case()?;
    let ctx = SweepContext::new(&c.grid, &c.medium, &c.pml, c.n_sub)?;
    let exact = oracle_strip_solve(&c.grid, &c.medium, &c.pml, &c.source)?;
    let rel = |u: &Field| u.sub(&exact).norm2() / exact.norm2();
    let (u, stats) = ctx.solve(&c.source, 1e-6, 50, SolveMode::Reduced)?;
    let (u_tight, _) = ctx.solve(&c.source, 1e-10, 50, SolveMode::Reduced)?;
    Ok(vec![
        CheckResult::new(
            "strip: converges in at most 3 iterations at tol 1e-6",
            stats.converged && stats.iterations <= 3,
            format!("iterations = {}", stats.iterations),
        ),
        CheckResult::new(
            "strip: matches oracle within 1e-6",
            rel(&u) <= 1e-6,
            format!("relative error = {:.3e}", rel(&u)),
        ),
        CheckResult::new(
            "strip: tol 1e-10 matches oracle within 1e-8",
            rel(&u_tight) <= 1e-8,
            format!("relative error = {:.3e}", rel(&u_tight)),
        ),
    ])
}

/// 1-D schedules against the full-domain formula.
pub fn oned_checks() -> Result<Vec<CheckResult>> {
    let n = 800;
    let k = 15.0;
    let j_count = 4;
    let x: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let bounds: Vec<usize> = (0..=j_count).map(|j| j * n / j_count).collect();
    let f: Vec<C64> = x
        .iter()
        .map(|&t| {
            let g = |c: f64, w: f64| (-((t - c) / w).powi(2)).exp() / (w * std::f64::consts::PI.sqrt());
            C64::new(g(0.37, 0.02), 0.5 * g(0.85, 0.03))
        })
        .collect();
    let z = C64::new(0.0, 0.0);
    let exact = solution_formula_1d(k, &x, &f, z, z)?;
    let err = |u: &[C64]| u.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let jac = sweep_1d(k, &x, &bounds, &f, Schedule::Jacobi, j_count)?;
    let dbl = sweep_1d(k, &x, &bounds, &f, Schedule::DoubleSweep, 1)?;
    let conc = sweep_1d(k, &x, &bounds, &f, Schedule::Concurrent, j_count)?;
    let (e_j, e_j2) = (err(&jac[j_count - 1]), err(&jac[1]));
    let (e_d, e_c) = (err(&dbl[1]), err(&conc[j_count - 1]));
    Ok(vec![
        CheckResult::new("1-D jacobi exact at n = J", e_j <= 1e-8, format!("sup error = {e_j:.3e}")),
        CheckResult::new("1-D jacobi not yet exact at n = 2", e_j2 > 1e-3, format!("sup error = {e_j2:.3e}")),
        CheckResult::new("1-D double sweep exact after one pass", e_d <= 1e-8, format!("sup error = {e_d:.3e}")),
        CheckResult::new("1-D concurrent exact at n = J", e_c <= 1e-8, format!("sup error = {e_c:.3e}")),
    ])
}
