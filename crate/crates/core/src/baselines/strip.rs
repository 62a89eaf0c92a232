//! Exact separable solver for a constant medium on a strip with Dirichlet
//! rows in y and PML only in x.
//!
//! The discrete y-Laplacian is diagonal in the sine basis
//! `S_{r,l} = sqrt(2/(n_y+1)) sin(π r l / (n_y+1))` with eigenvalues
//! `μ_l = (2 - 2 cos(π l / (n_y+1))) / h²`, so each mode reduces to a
//! tridiagonal system in x built from the same stencil coefficients as
//! the global operator.

use crate::discretize::GlobalOperator;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D, Medium, PmlSpec, YBoundary};
use crate::C64;

/// One transverse mode of the strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripMode {
    /// Mode index `l ≥ 1`.
    pub index: usize,
    /// Discrete transverse wavenumber `sqrt(μ_l)`.
    pub eta: f64,
    /// Impedance symbol of the mode.
    pub lambda: C64,
}

/// `i sqrt(k² - η²)` for propagating modes, `-sqrt(η² - k²)` for
/// evanescent ones; `|η| = k` is rejected.
pub fn lambda_of(eta: f64, k: f64) -> Result<C64> {
    let (a, k) = (eta.abs(), k.abs());
    if (a - k).abs() <= 1e-12 * k.max(a) {
        return Err(Error::GrazingMode(eta));
    }
    Ok(if a < k { C64::new(0.0, (k * k - a * a).sqrt()) } else { C64::new(-(a * a - k * k).sqrt(), 0.0) })
}

/// Transverse eigenvalue `μ_l` of the Dirichlet y-Laplacian.
pub fn transverse_eigenvalue(l: usize, n_y: usize, h: f64) -> f64 {
    let t = std::f64::consts::PI * l as f64 / (n_y + 1) as f64;
    (2.0 - 2.0 * t.cos()) / (h * h)
}

/// All `n_y` modes for wavenumber `k`.
pub fn strip_modes(n_y: usize, h: f64, k: f64) -> Result<Vec<StripMode>> {
    (1..=n_y)
        .map(|l| {
            let eta = transverse_eigenvalue(l, n_y, h).sqrt();
            Ok(StripMode { index: l, eta, lambda: lambda_of(eta, k)? })
        })
        .collect()
}

fn sine_basis(n_y: usize) -> Vec<f64> {
    let s = (2.0 / (n_y + 1) as f64).sqrt();
    let mut b = vec![0.0; n_y * n_y];
    for r in 1..=n_y {
        for l in 1..=n_y {
            let t = std::f64::consts::PI * (r * l) as f64 / (n_y + 1) as f64;
            b[(r - 1) * n_y + (l - 1)] = s * t.sin();
        }
    }
    b
}

/// Solves `A u = f` mode by mode.
pub fn oracle_strip_solve(grid: &Grid2D, medium: &Medium, pml: &PmlSpec, f: &Field) -> Result<Field> {
    if grid.y_boundary != YBoundary::Dirichlet {
        return Err(Error::InvalidArgument("strip oracle needs Dirichlet rows in y".into()));
    }
    if medium.c.iter().any(|&c| c != medium.c[0]) {
        return Err(Error::InvalidMedium("strip oracle needs a constant medium".into()));
    }
    f.check_shape(grid.n_x, grid.n_y)?;
    let op = GlobalOperator::new(grid, medium, pml)?;
    let (n_x, n_y, h) = (grid.n_x, grid.n_y, grid.h);
    // x part of the stencil; identical on every row for a constant medium
    let mut west = Vec::with_capacity(n_x);
    let mut east = Vec::with_capacity(n_x);
    let mut diag_x = Vec::with_capacity(n_x);
    for i in 0..n_x {
        let w = op.stencil.weights(i, 0);
        west.push(w.west);
        east.push(w.east);
        diag_x.push(w.center + w.south + w.north);
    }
    let basis = sine_basis(n_y);
    let zero = C64::new(0.0, 0.0);

    let mut u_hat = vec![zero; n_x * n_y];
    for l in 0..n_y {
        let mu = transverse_eigenvalue(l + 1, n_y, h);
        let mut rhs: Vec<C64> = (0..n_x).map(|i| (0..n_y).map(|r| f.get(i, r) * basis[r * n_y + l]).sum()).collect();
        // Thomas elimination
        let mut c_prime = vec![zero; n_x];
        let mut prev_c = zero;
        for i in 0..n_x {
            let d = diag_x[i] + mu;
            let scale = west[i].norm().max(d.norm()).max(east[i].norm());
            let piv = if i == 0 { d } else { d - west[i] * prev_c };
            if piv.norm() <= 1e-12 * scale {
                return Err(Error::ResonantMode { mode: l + 1 });
            }
            prev_c = if i + 1 < n_x { east[i] / piv } else { zero };
            c_prime[i] = prev_c;
            rhs[i] = if i == 0 { rhs[i] / piv } else { (rhs[i] - west[i] * rhs[i - 1]) / piv };
        }
        for i in (0..n_x.saturating_sub(1)).rev() {
            let next = rhs[i + 1];
            rhs[i] -= c_prime[i] * next;
        }
        for i in 0..n_x {
            u_hat[l * n_x + i] = rhs[i];
        }
    }
    let mut u = Field::zeros(n_x, n_y);
    for r in 0..n_y {
        for i in 0..n_x {
            let v: C64 = (0..n_y).map(|l| u_hat[l * n_x + i] * basis[r * n_y + l]).sum();
            u.set(i, r, v);
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::prng::SplitMix64;
    use nalgebra::DMatrix;

    fn strip(n_x: usize, n_y: usize) -> (Grid2D, Medium, PmlSpec) {
        let g = Grid2D::new(n_x, n_y, 0.05, 5, YBoundary::Dirichlet).unwrap();
        let m = Medium::constant(&g, 2.0 * std::f64::consts::PI * 2.3, 1.0).unwrap();
        (g, m, PmlSpec::new(5))
    }

    fn random_field(n_x: usize, n_y: usize, seed: u64) -> Field {
        let mut rng = SplitMix64::new(seed);
        let values = (0..n_x * n_y).map(|_| C64::new(rng.next_unit() - 0.5, rng.next_unit() - 0.5)).collect();
        Field::from_values(n_x, n_y, values).unwrap()
    }

    #[test]
    fn lambda_branches() {
        assert!((lambda_of(3.0, 5.0).unwrap() - C64::new(0.0, 4.0)).norm() < 1e-14);
        assert!((lambda_of(5.0, 3.0).unwrap() - C64::new(-4.0, 0.0)).norm() < 1e-14);
        assert!(matches!(lambda_of(2.0, 2.0), Err(Error::GrazingMode(_))));
    }

    #[test]
    fn modes_split_by_wavenumber() {
        let modes = strip_modes(20, 0.05, 14.45).unwrap();
        for m in modes {
            if m.eta < 14.45 {
                assert!(m.lambda.re == 0.0 && m.lambda.im > 0.0);
            } else {
                assert!(m.lambda.im == 0.0 && m.lambda.re < 0.0);
            }
        }
    }

    #[test]
    fn zero_source_zero_solution() {
        let (g, m, p) = strip(30, 20);
        let u = oracle_strip_solve(&g, &m, &p, &Field::zeros(30, 20)).unwrap();
        assert_eq!(u.norm_inf(), 0.0);
    }

    #[test]
    fn matches_dense_lu() {
        let (g, m, p) = strip(30, 20);
        let f = random_field(30, 20, 7);
        let u = oracle_strip_solve(&g, &m, &p, &f).unwrap();
        let op = GlobalOperator::new(&g, &m, &p).unwrap();
        let n = g.len();
        let mut a = DMatrix::<C64>::zeros(n, n);
        for col in 0..n {
            let mut e = Field::zeros(30, 20);
            e.values[col] = C64::new(1.0, 0.0);
            let ae = op.apply(&e).unwrap();
            for row in 0..n {
                a[(row, col)] = ae.values[row];
            }
        }
        let b = nalgebra::DVector::from_vec(f.values.clone());
        let x = a.lu().solve(&b).unwrap();
        let diff: f64 = x.iter().zip(&u.values).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff / x.norm() <= 1e-10, "{}", diff / x.norm());
    }

    #[test]
    fn single_mode_stays_single() {
        let (g, m, p) = strip(30, 20);
        let l = 3;
        let mut f = Field::zeros(30, 20);
        for r in 0..20 {
            let s = (std::f64::consts::PI * ((r + 1) * l) as f64 / 21.0).sin();
            for i in 0..30 {
                f.set(i, r, C64::new(s * (i as f64 * 0.3).cos(), 0.0));
            }
        }
        let u = oracle_strip_solve(&g, &m, &p, &f).unwrap();
        // every row is a multiple of the same x profile
        let r0 = 4;
        let s0 = (std::f64::consts::PI * ((r0 + 1) * l) as f64 / 21.0).sin();
        for r in 0..20 {
            let s = (std::f64::consts::PI * ((r + 1) * l) as f64 / 21.0).sin();
            for i in 0..30 {
                let want = u.get(i, r0) * (s / s0);
                assert!((u.get(i, r) - want).norm() <= 1e-12 * u.norm_inf());
            }
        }
    }

    #[test]
    fn rejects_pml_rows_and_variable_media() {
        let g = Grid2D::new(30, 20, 0.05, 5, YBoundary::Pml).unwrap();
        let m = Medium::constant(&g, 10.0, 1.0).unwrap();
        assert!(oracle_strip_solve(&g, &m, &PmlSpec::new(5), &Field::zeros(30, 20)).is_err());
        let (g, mut m, p) = strip(30, 20);
        m.c[3] = 1.1;
        assert!(oracle_strip_solve(&g, &m, &p, &Field::zeros(30, 20)).is_err());
    }
}
