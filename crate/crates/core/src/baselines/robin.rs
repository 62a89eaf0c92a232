//! Double sweep with Robin transmission conditions, used as a right
//! preconditioner for full-space GMRES.
//!
//! Right-sweep slab `j` spans columns `β_{j-1}+1 ..= β_j + m` (the first
//! starts at column 1, the last ends at `n_x`). Its left end carries the
//! impedance data `∂x v + ik v` of slab `j-1` at the half point
//! `β_{j-1} + 1/2`; its right end is homogeneous `-∂x v + ik v = 0`.
//! The left sweep is the mirror image on the residual over the shifted
//! partition `β̃`: slab `j` spans `β̃_{j-1}+1-m ..= β̃_j` and receives
//! `-∂x w + ik w` of slab `j+1` at `β̃_j + 1/2`. The shift puts both
//! columns of each residual jump `β_j, β_j + 1` into the same left slab.
//! Each sweep keeps the core columns of its own partition in the composite.

use rayon::prelude::*;

use crate::direct::{factor, Factorization};
use crate::discretize::{assemble_slab, GlobalOperator, XBoundary};
use crate::error::{Error, Result};
use crate::grid::{plan_decomposition, DecompositionPlan, Field, Grid2D, Medium, PmlSpec};
use crate::krylov::gmres;
use crate::sweep::SolveStats;
use crate::C64;

/// Overlap of neighboring Robin slabs in grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobinConfig {
    pub m_overlap: usize,
}

impl Default for RobinConfig {
    fn default() -> Self {
        Self { m_overlap: 1 }
    }
}

struct Slab {
    lo: usize,
    hi: usize,
    factor: Factorization,
}

impl Slab {
    fn width(&self) -> usize {
        self.hi - self.lo + 1
    }

    fn value(&self, local: &[C64], col: usize, r: usize) -> C64 {
        local[r * self.width() + (col - self.lo)]
    }
}

/// Factorized Robin slabs for both sweep directions.
pub struct RobinContext {
    pub grid: Grid2D,
    pub plan: DecompositionPlan,
    pub op: GlobalOperator,
    pub config: RobinConfig,
    medium: Medium,
    right: Vec<Slab>,
    left: Vec<Slab>,
}

impl RobinContext {
    pub fn new(grid: &Grid2D, medium: &Medium, pml: &PmlSpec, n_sub: usize, config: RobinConfig) -> Result<Self> {
        let plan = plan_decomposition(grid, n_sub, pml.w_pml)?;
        let m = config.m_overlap;
        let n_x = grid.n_x;
        let op = GlobalOperator::new(grid, medium, pml)?;
        let bounds = |j: usize, rightward: bool| -> (usize, usize, XBoundary, XBoundary) {
            let first = j == 1;
            let last = j == plan.n_sub;
            let (lo, hi) = if rightward {
                let (lo, hi) = plan.upward_range(j);
                (lo, if last { hi } else { (hi + m).min(n_x) })
            } else {
                let (lo, hi) = plan.downward_range(j);
                (if first { lo } else { lo.saturating_sub(m).max(1) }, hi)
            };
            let left = if first { XBoundary::Dirichlet } else { XBoundary::Robin };
            let right = if last { XBoundary::Dirichlet } else { XBoundary::Robin };
            (lo, hi, left, right)
        };
        let build = |rightward: bool| -> Result<Vec<Slab>> {
            (1..=plan.n_sub)
                .into_par_iter()
                .map(|j| {
                    let (lo, hi, left, right) = bounds(j, rightward);
                    let wrap = |e: Error| Error::Subdomain { subdomain: j, source: Box::new(e) };
                    let st = assemble_slab(grid, medium, pml, lo, hi, left, right).map_err(wrap)?;
                    let factor = factor(&st.to_block_tridiagonal()).map_err(wrap)?;
                    Ok(Slab { lo, hi, factor })
                })
                .collect()
        };
        let right = build(true)?;
        let left = build(false)?;
        Ok(Self { grid: grid.clone(), plan, op, config, medium: medium.clone(), right, left })
    }

    fn n_sub(&self) -> usize {
        self.plan.n_sub
    }

    fn owned(&self, j: usize, rightward: bool) -> (usize, usize) {
        if rightward {
            self.plan.upward_range(j)
        } else {
            self.plan.downward_range(j)
        }
    }

    fn restrict(&self, f: &Field, slab: &Slab, j: usize, rightward: bool) -> Vec<C64> {
        let (lo, hi) = self.owned(j, rightward);
        let w = slab.width();
        let mut out = vec![C64::new(0.0, 0.0); w * self.grid.n_y];
        for r in 0..self.grid.n_y {
            for c in lo..=hi {
                out[r * w + c - slab.lo] = f.get(c - 1, r);
            }
        }
        out
    }

    /// Value of a neighbor slab at `col`, falling back to the ghost implied
    /// by its homogeneous Robin end when `col` lies just outside it.
    fn neighbor_value(&self, slab: &Slab, local: &[C64], col: usize, r: usize) -> C64 {
        if (slab.lo..=slab.hi).contains(&col) {
            return slab.value(local, col, r);
        }
        let (edge, h) = (if col > slab.hi { slab.hi } else { slab.lo }, self.grid.h);
        let k = self.medium.k(edge - 1, r);
        let ratio = C64::new(1.0, k * h / 2.0) / C64::new(1.0, -k * h / 2.0);
        slab.value(local, edge, r) * ratio
    }

    /// Adds the Robin data at half point `c - 1/2` (left end, `outward = -1`)
    /// or `c + 1/2` (right end, `outward = +1`) of a receiving slab whose end
    /// column is `c`.
    fn add_robin_data(&self, rhs: &mut [C64], recv: &Slab, nb: &Slab, nb_local: &[C64], outward: i64) {
        let h = self.grid.h;
        let w = recv.width();
        let (c, l) = if outward < 0 { (recv.lo, 0) } else { (recv.hi, w - 1) };
        let other = (c as i64 + outward) as usize;
        for r in 0..self.grid.n_y {
            let k = self.medium.k(c - 1, r);
            let uc = self.neighbor_value(nb, nb_local, c, r);
            let uo = self.neighbor_value(nb, nb_local, other, r);
            // outward normal derivative across the half point plus ik times the average
            let d = (uo - uc) * (-1.0 / h) + C64::new(0.0, k) * (uc + uo) * 0.5;
            rhs[r * w + l] -= d / (C64::new(1.0, -k * h / 2.0) * h);
        }
    }

    fn solve_slab(&self, slab: &Slab, j: usize, rhs: &[C64]) -> Result<Vec<C64>> {
        slab.factor.solve(rhs).map_err(|e| Error::Subdomain { subdomain: j, source: Box::new(e) })
    }

    fn copy_owned(&self, j: usize, rightward: bool, slab: &Slab, local: &[C64], out: &mut Field) {
        let (lo, hi) = self.owned(j, rightward);
        for r in 0..self.grid.n_y {
            for c in lo..=hi {
                out.set(c - 1, r, slab.value(local, c, r));
            }
        }
    }

    /// Right sweep `j = 1..J`.
    pub fn right_sweep(&self, f: &Field) -> Result<Field> {
        f.check_shape(self.grid.n_x, self.grid.n_y)?;
        let mut v = Field::zeros_like(&self.grid);
        let mut prev: Option<Vec<C64>> = None;
        for j in 1..=self.n_sub() {
            let slab = &self.right[j - 1];
            let mut rhs = self.restrict(f, slab, j, true);
            if let Some(p) = &prev {
                self.add_robin_data(&mut rhs, slab, &self.right[j - 2], p, -1);
            }
            let sol = self.solve_slab(slab, j, &rhs)?;
            self.copy_owned(j, true, slab, &sol, &mut v);
            prev = Some(sol);
        }
        Ok(v)
    }

    /// Left sweep `j = J..1`.
    pub fn left_sweep(&self, g: &Field) -> Result<Field> {
        g.check_shape(self.grid.n_x, self.grid.n_y)?;
        let mut w = Field::zeros_like(&self.grid);
        let mut prev: Option<Vec<C64>> = None;
        for j in (1..=self.n_sub()).rev() {
            let slab = &self.left[j - 1];
            let mut rhs = self.restrict(g, slab, j, false);
            if let Some(p) = &prev {
                self.add_robin_data(&mut rhs, slab, &self.left[j], p, 1);
            }
            let sol = self.solve_slab(slab, j, &rhs)?;
            self.copy_owned(j, false, slab, &sol, &mut w);
            prev = Some(sol);
        }
        Ok(w)
    }

    /// `v + w`, with `w` the left sweep applied to `f - A v`.
    pub fn precondition(&self, f: &Field) -> Result<Field> {
        let v = self.right_sweep(f)?;
        let g = self.op.residual(f, &v)?;
        let w = self.left_sweep(&g)?;
        Ok(v.add(&w))
    }

    /// Solves `A u = f` by GMRES on `A M z = f`, `u = M z`.
    pub fn solve(&self, f: &Field, tol: f64, max_iter: usize) -> Result<(Field, SolveStats)> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
        }
        f.check_shape(self.grid.n_x, self.grid.n_y)?;
        let (n_x, n_y) = (self.grid.n_x, self.grid.n_y);
        let apply = |z: &[C64]| -> Result<Vec<C64>> {
            let zf = Field::from_values(n_x, n_y, z.to_vec())?;
            Ok(self.op.apply(&self.precondition(&zf)?)?.values)
        };
        let (z, report) = gmres(apply, &f.values, tol, max_iter)?;
        let u = self.precondition(&Field::from_values(n_x, n_y, z)?)?;
        let f_norm = f.norm2();
        let true_residual = if f_norm == 0.0 { 0.0 } else { self.op.residual(f, &u)?.norm2() / f_norm };
        Ok((
            u,
            SolveStats {
                iterations: report.iterations,
                converged: report.converged,
                residual_history: report.residual_history,
                true_residual,
            },
        ))
    }
}

/// Free-function form of [`RobinContext::precondition`].
pub fn robin_precondition(ctx: &RobinContext, f: &Field) -> Result<Field> {
    ctx.precondition(f)
}
