//! Double-sweep preconditioner `P`, the operator `AP`, interface reduction
//! and the top-level GMRES driver.
//!
//! One factorization per subdomain serves both sweeps: the subdomain grid
//! spans `β_{j-1}+1 ..= β̃_j` plus pads, which contains the upward core
//! `β_{j-1}+1 ..= β_j` and the downward core `β̃_{j-1}+1 ..= β̃_j`, and the
//! pad layers start exactly at `b_{j-1}` and `b̃_j`.

use rayon::prelude::*;

use crate::direct::{factor, Factorization};
use crate::discretize::{
    assemble_subdomain, restrict_rhs, transmission_source, GlobalOperator, SubdomainOperator, Sweep,
};
use crate::error::{Error, Result};
use crate::grid::{plan_decomposition, DecompositionPlan, Field, Grid2D, Medium, PmlSpec};
use crate::krylov::gmres;
use crate::C64;

/// Which system GMRES iterates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// Interface unknowns only (`2(J-1) n_y` of them).
    Reduced,
    /// Full-grid right-preconditioned system `AP z = f`.
    Full,
}

/// Factorized subdomains plus the global operator.
pub struct SweepContext {
    pub grid: Grid2D,
    pub plan: DecompositionPlan,
    pub op: GlobalOperator,
    pub subdomains: Vec<SubdomainOperator>,
    factors: Vec<Factorization>,
}

/// Outcome of [`SweepContext::solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    /// `‖f - A u‖₂ / ‖f‖₂` of the returned solution.
    pub true_residual: f64,
}

impl SweepContext {
    /// Plans the decomposition, assembles and factors every subdomain.
    pub fn new(grid: &Grid2D, medium: &Medium, pml: &PmlSpec, n_sub: usize) -> Result<Self> {
        let plan = plan_decomposition(grid, n_sub, pml.w_pml)?;
        Self::with_plan(grid, medium, pml, plan)
    }

    pub fn with_plan(grid: &Grid2D, medium: &Medium, pml: &PmlSpec, plan: DecompositionPlan) -> Result<Self> {
        let op = GlobalOperator::new(grid, medium, pml)?;
        let built: Vec<(SubdomainOperator, Factorization)> = (1..=plan.n_sub)
            .into_par_iter()
            .map(|j| {
                let wrap = |e: Error| Error::Subdomain { subdomain: j, source: Box::new(e) };
                let sub = assemble_subdomain(j, &plan, grid, medium, pml).map_err(wrap)?;
                let fac = factor(&sub.stencil.to_block_tridiagonal()).map_err(wrap)?;
                Ok((sub, fac))
            })
            .collect::<Result<_>>()?;
        let (subdomains, factors) = built.into_iter().unzip();
        Ok(Self { grid: grid.clone(), plan, op, subdomains, factors })
    }

    pub fn n_sub(&self) -> usize {
        self.plan.n_sub
    }

    fn solve_local(&self, j: usize, rhs: &[C64]) -> Result<Vec<C64>> {
        self.factors[j - 1].solve(rhs).map_err(|e| Error::Subdomain { subdomain: j, source: Box::new(e) })
    }

    fn copy_owned(&self, j: usize, which: Sweep, local: &[C64], out: &mut Field) {
        let sd = self.plan.subdomain(j);
        let (lo, hi) = match which {
            Sweep::Upward => self.plan.upward_range(j),
            Sweep::Downward => self.plan.downward_range(j),
        };
        for r in 0..self.grid.n_y {
            for c in lo..=hi {
                let l = sd.local(c as i64).expect("owned column in grid");
                out.set(c - 1, r, local[r * sd.width + l]);
            }
        }
    }

    fn check(&self, f: &Field) -> Result<()> {
        f.check_shape(self.grid.n_x, self.grid.n_y)
    }

    /// Solves `j = 1..J` in order, each fed by the single-layer source of
    /// its left neighbor at `b_{j-1}`; returns the composite `v`.
    pub fn upward_sweep(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        let (n_y, h) = (self.grid.n_y, self.grid.h);
        let mut v = Field::zeros_like(&self.grid);
        let mut prev: Option<Vec<C64>> = None;
        for j in 1..=self.n_sub() {
            let sd = self.plan.subdomain(j);
            let mut rhs = restrict_rhs(f, &self.plan, j, Sweep::Upward);
            if let Some(p) = &prev {
                let src = transmission_source(p, self.plan.subdomain(j - 1), n_y, h, self.plan.beta[j - 1], -2.0)?;
                src.add_to(sd, &mut rhs);
            }
            let sol = self.solve_local(j, &rhs)?;
            self.copy_owned(j, Sweep::Upward, &sol, &mut v);
            prev = Some(sol);
        }
        Ok(v)
    }

    /// Solves `j = J..1` on the β̃ partition, each fed by its right
    /// neighbor at `b̃_j` with factor `+2`; returns the composite `w`.
    pub fn downward_sweep(&self, g: &Field) -> Result<Field> {
        self.check(g)?;
        let (n_y, h) = (self.grid.n_y, self.grid.h);
        let mut w = Field::zeros_like(&self.grid);
        let mut prev: Option<Vec<C64>> = None;
        for j in (1..=self.n_sub()).rev() {
            let sd = self.plan.subdomain(j);
            let mut rhs = restrict_rhs(g, &self.plan, j, Sweep::Downward);
            if let Some(p) = &prev {
                let src = transmission_source(p, self.plan.subdomain(j + 1), n_y, h, self.plan.beta_tilde[j], 2.0)?;
                src.add_to(sd, &mut rhs);
            }
            let sol = self.solve_local(j, &rhs)?;
            self.copy_owned(j, Sweep::Downward, &sol, &mut w);
            prev = Some(sol);
        }
        Ok(w)
    }

    /// `P f = v + w` with `v` from the upward sweep and `w` from the
    /// downward sweep on `g = f - A v`.
    pub fn apply_p(&self, f: &Field) -> Result<Field> {
        let v = self.upward_sweep(f)?;
        let g = self.op.residual(f, &v)?;
        let w = self.downward_sweep(&g)?;
        Ok(v.add(&w))
    }

    /// `AP f` in residual form `f - h`, `h = (f - A v) - A w`; `f - AP f`
    /// is supported on the interface layers to rounding.
    pub fn apply_ap(&self, f: &Field) -> Result<Field> {
        let v = self.upward_sweep(f)?;
        let g = self.op.residual(f, &v)?;
        let w = self.downward_sweep(&g)?;
        let h = self.op.residual(&g, &w)?;
        Ok(f.sub(&h))
    }

    /// Solves each subdomain with `f` restricted to the β̃ cores; returns
    /// the composite `ũ` and the interface-supported `φ = f - A ũ`.
    pub fn presolve_interior(&self, f: &Field) -> Result<(Field, Field)> {
        self.check(f)?;
        let locals: Vec<Vec<C64>> = (1..=self.n_sub())
            .into_par_iter()
            .map(|j| self.solve_local(j, &restrict_rhs(f, &self.plan, j, Sweep::Downward)))
            .collect::<Result<_>>()?;
        let mut ut = Field::zeros_like(&self.grid);
        for (j, loc) in locals.iter().enumerate() {
            self.copy_owned(j + 1, Sweep::Downward, loc, &mut ut);
        }
        let phi = self.op.residual(f, &ut)?;
        Ok((ut, phi))
    }

    pub fn interface_len(&self) -> usize {
        2 * (self.n_sub() - 1) * self.grid.n_y
    }

    /// Solves `A u = f` with GMRES preconditioned on the right by `P`.
    pub fn solve(&self, f: &Field, tol: f64, max_iter: usize, mode: SolveMode) -> Result<(Field, SolveStats)> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
        }
        self.check(f)?;
        let f_norm = f.norm2();
        let (u, report) = match mode {
            SolveMode::Full => {
                let apply = |z: &[C64]| -> Result<Vec<C64>> {
                    let zf = Field::from_values(self.grid.n_x, self.grid.n_y, z.to_vec())?;
                    Ok(self.apply_ap(&zf)?.values)
                };
                let (z, report) = gmres(apply, &f.values, tol, max_iter)?;
                let zf = Field::from_values(self.grid.n_x, self.grid.n_y, z)?;
                (self.apply_p(&zf)?, report)
            }
            SolveMode::Reduced => {
                let (ut, phi) = self.presolve_interior(f)?;
                let rhs = restrict_interface(&phi, &self.plan);
                let apply = |y: &[C64]| -> Result<Vec<C64>> {
                    let yv = InterfaceVector { n_y: self.grid.n_y, values: y.to_vec() };
                    let full = prolong_interface(&yv, &self.plan, self.grid.n_x)?;
                    Ok(restrict_interface(&self.apply_ap(&full)?, &self.plan).values)
                };
                let (y, report) = gmres(apply, &rhs.values, tol, max_iter)?;
                let yv = InterfaceVector { n_y: self.grid.n_y, values: y };
                let psi = self.apply_p(&prolong_interface(&yv, &self.plan, self.grid.n_x)?)?;
                (psi.add(&ut), report)
            }
        };
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

/// Values on the `2(J-1)` interface layers, layer-major: for each interface
/// `j`, column `β_j + 1` then `β_j + 2`, each over all rows.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceVector {
    pub n_y: usize,
    pub values: Vec<C64>,
}

pub fn restrict_interface(x: &Field, plan: &DecompositionPlan) -> InterfaceVector {
    let cols = plan.interface_columns();
    let mut values = Vec::with_capacity(cols.len() * x.n_y);
    for c in cols {
        values.extend((0..x.n_y).map(|r| x.get(c - 1, r)));
    }
    InterfaceVector { n_y: x.n_y, values }
}

pub fn prolong_interface(y: &InterfaceVector, plan: &DecompositionPlan, n_x: usize) -> Result<Field> {
    let cols = plan.interface_columns();
    if y.values.len() != cols.len() * y.n_y {
        return Err(Error::ShapeMismatch {
            expected: format!("{} interface values", cols.len() * y.n_y),
            got: format!("{}", y.values.len()),
        });
    }
    let mut out = Field::zeros(n_x, y.n_y);
    for (layer, c) in cols.iter().enumerate() {
        for r in 0..y.n_y {
            out.set(c - 1, r, y.values[layer * y.n_y + r]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::media::{generate_random_medium, point_source};
    use crate::bench::prng::SplitMix64;
    use proptest::prelude::*;

    fn context(n_x: usize, n_y: usize, n_sub: usize) -> SweepContext {
        let h = 0.02;
        let g = Grid2D::new(n_x, n_y, h, 4, crate::grid::YBoundary::Pml).unwrap();
        let omega = 2.0 * std::f64::consts::PI / (10.0 * h);
        let m = generate_random_medium(&g, omega, 11, 0.25, 3).unwrap();
        SweepContext::new(&g, &m, &PmlSpec::new(4), n_sub).unwrap()
    }

    fn random_field(n_x: usize, n_y: usize, seed: u64) -> Field {
        let mut rng = SplitMix64::new(seed);
        let values = (0..n_x * n_y).map(|_| C64::new(rng.next_unit() - 0.5, rng.next_unit() - 0.5)).collect();
        Field::from_values(n_x, n_y, values).unwrap()
    }

    fn rel(a: &Field, b: &Field) -> f64 {
        a.sub(b).norm2() / b.norm2()
    }

    fn max_off_interface(x: &Field, plan: &DecompositionPlan) -> f64 {
        let cols = plan.interface_columns();
        let mut m: f64 = 0.0;
        for r in 0..x.n_y {
            for c in 1..=x.n_x {
                if !cols.contains(&c) {
                    m = m.max(x.get(c - 1, r).norm());
                }
            }
        }
        m
    }

    #[test]
    fn zero_source_gives_zero() {
        let ctx = context(40, 24, 3);
        let z = Field::zeros_like(&ctx.grid);
        assert_eq!(ctx.upward_sweep(&z).unwrap().norm_inf(), 0.0);
        assert_eq!(ctx.downward_sweep(&z).unwrap().norm_inf(), 0.0);
        assert_eq!(ctx.apply_p(&z).unwrap().norm_inf(), 0.0);
        assert_eq!(ctx.apply_ap(&z).unwrap().norm_inf(), 0.0);
        let (ut, phi) = ctx.presolve_interior(&z).unwrap();
        assert_eq!(ut.norm_inf() + phi.norm_inf(), 0.0);
    }

    #[test]
    fn single_subdomain_is_exact() {
        let ctx = context(30, 20, 1);
        let f = random_field(30, 20, 3);
        let v = ctx.upward_sweep(&f).unwrap();
        assert!(ctx.op.residual(&f, &v).unwrap().norm_inf() <= 1e-9 * f.norm_inf());
        let w = ctx.downward_sweep(&f).unwrap();
        assert!(rel(&w, &v) <= 1e-12);
        assert!(rel(&ctx.apply_ap(&f).unwrap(), &f) <= 1e-9);
        assert!(rel(&ctx.op.apply(&ctx.apply_p(&f).unwrap()).unwrap(), &f) <= 1e-9);
        let (ut, phi) = ctx.presolve_interior(&f).unwrap();
        assert!(phi.norm2() <= 1e-9 * f.norm2());
        assert!(rel(&ut, &v) <= 1e-12);
        assert_eq!(ctx.interface_len(), 0);
        let (u, stats) = ctx.solve(&f, 1e-8, 10, SolveMode::Reduced).unwrap();
        assert!(stats.iterations <= 1 && stats.converged);
        assert!(stats.true_residual <= 1e-9);
        let (_, stats) = ctx.solve(&f, 1e-8, 10, SolveMode::Full).unwrap();
        assert_eq!(stats.iterations, 1);
        assert!(rel(&u, &v) <= 1e-9);
    }

    #[test]
    fn preconditioner_is_linear() {
        let ctx = context(40, 24, 4);
        let (f1, f2) = (random_field(40, 24, 5), random_field(40, 24, 6));
        let (a, b) = (C64::new(0.7, -1.3), C64::new(-0.2, 0.4));
        let combo = f1.scale(a).add(&f2.scale(b));
        let lhs = ctx.apply_p(&combo).unwrap();
        let rhs = ctx.apply_p(&f1).unwrap().scale(a).add(&ctx.apply_p(&f2).unwrap().scale(b));
        assert!(rel(&lhs, &rhs) <= 1e-12);
        let lhs = ctx.apply_ap(&combo).unwrap();
        let rhs = ctx.apply_ap(&f1).unwrap().scale(a).add(&ctx.apply_ap(&f2).unwrap().scale(b));
        assert!(rel(&lhs, &rhs) <= 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn residual_lives_on_interface_layers(seed in any::<u64>(), n_sub in 2usize..5) {
            let ctx = context(44, 20, n_sub);
            let f = random_field(44, 20, seed);
            let r = f.sub(&ctx.apply_ap(&f).unwrap());
            prop_assert!(max_off_interface(&r, &ctx.plan) <= 1e-12 * f.norm_inf());
            let (_, phi) = ctx.presolve_interior(&f).unwrap();
            prop_assert!(max_off_interface(&phi, &ctx.plan) <= 1e-12 * f.norm_inf());
            let back = prolong_interface(&restrict_interface(&phi, &ctx.plan), &ctx.plan, ctx.grid.n_x).unwrap();
            prop_assert!(back.sub(&phi).norm_inf() <= 1e-12 * f.norm_inf());
        }

        #[test]
        fn interface_restriction_round_trips(seed in any::<u64>(), n_sub in 1usize..5) {
            let ctx = context(44, 20, n_sub);
            let mut rng = SplitMix64::new(seed);
            let y = InterfaceVector {
                n_y: 20,
                values: (0..ctx.interface_len()).map(|_| C64::new(rng.next_unit(), rng.next_unit())).collect(),
            };
            let full = prolong_interface(&y, &ctx.plan, 44).unwrap();
            prop_assert_eq!(&restrict_interface(&full, &ctx.plan), &y);
            let x = random_field(44, 20, seed ^ 1);
            let once = prolong_interface(&restrict_interface(&x, &ctx.plan), &ctx.plan, 44).unwrap();
            let twice = prolong_interface(&restrict_interface(&once, &ctx.plan), &ctx.plan, 44).unwrap();
            prop_assert_eq!(once, twice);
        }
    }

    #[test]
    fn prolong_rejects_wrong_length() {
        let ctx = context(40, 20, 3);
        let y = InterfaceVector { n_y: 20, values: vec![C64::new(0.0, 0.0); 7] };
        assert!(prolong_interface(&y, &ctx.plan, 40).is_err());
    }

    fn max_in_core(x: &Field, lo: usize, hi: usize) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..x.n_y {
            for c in lo..=hi {
                m = m.max(x.get(c - 1, r).norm());
            }
        }
        m
    }

    #[test]
    fn sweeps_carry_information_across_all_subdomains() {
        let ctx = context(60, 24, 5);
        let (lo, _) = ctx.plan.upward_range(1);
        let f = point_source(&ctx.grid, lo + 6, 12).unwrap();
        let v = ctx.upward_sweep(&f).unwrap();
        for j in 1..=5 {
            let (a, b) = ctx.plan.upward_range(j);
            assert!(max_in_core(&v, a, b) > 0.0, "subdomain {j}");
        }
        let (a, b) = ctx.plan.downward_range(5);
        let g = point_source(&ctx.grid, (a + b) / 2, 12).unwrap();
        let w = ctx.downward_sweep(&g).unwrap();
        let (a, b) = ctx.plan.downward_range(1);
        assert!(max_in_core(&w, a, b) > 0.0);
    }

    #[test]
    fn presolve_residual_next_to_source_core() {
        let ctx = context(60, 24, 3);
        let (a, b) = ctx.plan.downward_range(2);
        let mut f = Field::zeros_like(&ctx.grid);
        for r in 6..18 {
            for c in a..=b {
                f.set(c - 1, r, C64::new(1.0, (c + r) as f64 * 0.1));
            }
        }
        let (_, phi) = ctx.presolve_interior(&f).unwrap();
        let cols = ctx.plan.interface_columns();
        assert!(max_off_interface(&phi, &ctx.plan) <= 1e-12 * f.norm_inf());
        // both interfaces bordering core 2 carry residual
        for pair in cols.chunks(2) {
            assert!(max_in_core(&phi, pair[0], pair[1]) > 1e-6 * f.norm_inf());
        }
    }

    #[test]
    fn reduced_and_full_modes_agree() {
        let ctx = context(60, 50, 5);
        let f = point_source(&ctx.grid, 31, 25).unwrap();
        let (ur, sr) = ctx.solve(&f, 1e-10, 60, SolveMode::Reduced).unwrap();
        let (uf, sf) = ctx.solve(&f, 1e-10, 60, SolveMode::Full).unwrap();
        assert!(sr.converged && sf.converged);
        assert!(sr.true_residual <= 5e-10 && sf.true_residual <= 5e-10);
        assert!(rel(&ur, &uf) <= 1e-6, "{}", rel(&ur, &uf));
    }

    #[test]
    fn rejects_bad_tolerance_and_shape() {
        let ctx = context(40, 20, 2);
        let f = random_field(40, 20, 1);
        assert!(ctx.solve(&f, 0.0, 10, SolveMode::Full).is_err());
        assert!(ctx.apply_p(&Field::zeros(39, 20)).is_err());
    }
}
