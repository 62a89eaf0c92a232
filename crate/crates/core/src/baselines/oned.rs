//! Semi-analytic 1-D Helmholtz problem with Robin ends and the sweeping
//! iterations built on it.
//!
//! On `]a, b[` the solution of `-u'' - k² u = f` with `∂x u + ik u = h1`
//! at `a` and `-∂x u + ik u = h2` at `b` is
//!
//! ```text
//! u(x) = i/(2k) [ e^{ikx} ∫_a^x e^{-iks} f ds + e^{-ikx} ∫_x^b e^{iks} f ds ]
//!        + e^{ik(x-a)} h1 / (2ik) + e^{-ik(x-b)} h2 / (2ik).
//! ```
//!
//! Both integrals come from cumulative trapezoid sums on one shared grid,
//! so integrals over adjacent intervals add up exactly and the subdomain
//! iterations reproduce the full-domain formula to rounding.

use crate::error::{Error, Result};
use crate::C64;

/// Order in which subdomain problems are updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Every subdomain takes its Robin data from the previous iterate.
    Jacobi,
    /// One pass `1..J` with homogeneous right data, then `J..1`.
    DoubleSweep,
    /// At step `n` only subdomains `n` and `J + 1 - n` are updated.
    Concurrent,
}

/// Cumulative quadrature of `e^{∓iks} f(s)` on a grid.
#[derive(Debug, Clone)]
pub struct Quadrature1d {
    k: f64,
    x: Vec<f64>,
    /// `∫_{x_0}^{x_n} e^{-iks} f ds`.
    minus: Vec<C64>,
    /// `∫_{x_0}^{x_n} e^{iks} f ds`.
    plus: Vec<C64>,
}

fn phase(t: f64) -> C64 {
    C64::new(t.cos(), t.sin())
}

impl Quadrature1d {
    pub fn new(k: f64, x: &[f64], f: &[C64]) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavenumber k = {k} must be positive")));
        }
        if x.len() != f.len() {
            return Err(Error::ShapeMismatch { expected: format!("{} samples", x.len()), got: format!("{}", f.len()) });
        }
        if x.len() < 2 || x.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidArgument("quadrature nodes must be strictly increasing".into()));
        }
        let mut minus = vec![C64::new(0.0, 0.0); x.len()];
        let mut plus = minus.clone();
        for n in 1..x.len() {
            let dx = x[n] - x[n - 1];
            let (a, b) = (f[n - 1], f[n]);
            minus[n] = minus[n - 1] + (phase(-k * x[n - 1]) * a + phase(-k * x[n]) * b) * (dx / 2.0);
            plus[n] = plus[n - 1] + (phase(k * x[n - 1]) * a + phase(k * x[n]) * b) * (dx / 2.0);
        }
        Ok(Self { k, x: x.to_vec(), minus, plus })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Solution on nodes `ia..=ib` of the problem on `]x_ia, x_ib[`.
    pub fn solve(&self, ia: usize, ib: usize, h1: C64, h2: C64) -> Vec<C64> {
        let k = self.k;
        let (a, b) = (self.x[ia], self.x[ib]);
        let i2k = C64::new(0.0, 2.0 * k);
        (ia..=ib)
            .map(|n| {
                let x = self.x[n];
                let left = phase(k * x) * (self.minus[n] - self.minus[ia]);
                let right = phase(-k * x) * (self.plus[ib] - self.plus[n]);
                (left + right) * C64::new(0.0, 1.0 / (2.0 * k))
                    + phase(k * (x - a)) * h1 / i2k
                    + phase(-k * (x - b)) * h2 / i2k
            })
            .collect()
    }

    /// `∂x u + ik u` at the right end `x_ib`.
    pub fn trace_right(&self, ia: usize, ib: usize, h1: C64) -> C64 {
        let (a, b) = (self.x[ia], self.x[ib]);
        -phase(self.k * b) * (self.minus[ib] - self.minus[ia]) + phase(self.k * (b - a)) * h1
    }

    /// `-∂x u + ik u` at the left end `x_ia`.
    pub fn trace_left(&self, ia: usize, ib: usize, h2: C64) -> C64 {
        let (a, b) = (self.x[ia], self.x[ib]);
        -phase(-self.k * a) * (self.plus[ib] - self.plus[ia]) + phase(-self.k * (a - b)) * h2
    }
}

/// Evaluates the solution formula on the whole grid `x`.
pub fn solution_formula_1d(k: f64, x: &[f64], f: &[C64], h1: C64, h2: C64) -> Result<Vec<C64>> {
    let q = Quadrature1d::new(k, x, f)?;
    Ok(q.solve(0, q.len() - 1, h1, h2))
}

/// Robin data of one subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Data {
    h1: C64,
    h2: C64,
}

struct Sweeper<'a> {
    q: &'a Quadrature1d,
    bounds: &'a [usize],
}

impl Sweeper<'_> {
    fn n_sub(&self) -> usize {
        self.bounds.len() - 1
    }

    fn ends(&self, j: usize) -> (usize, usize) {
        (self.bounds[j - 1], self.bounds[j])
    }

    /// Data for subdomain `j` from its neighbors; an unsolved neighbor
    /// (`None`) is the zero function.
    fn incoming(&self, d: &[Option<Data>], j: usize) -> Data {
        let zero = C64::new(0.0, 0.0);
        let h1 = match (j > 1).then(|| d[j - 2]).flatten() {
            Some(nb) => {
                let (a, b) = self.ends(j - 1);
                self.q.trace_right(a, b, nb.h1)
            }
            None => zero,
        };
        let h2 = match (j < self.n_sub()).then(|| d[j]).flatten() {
            Some(nb) => {
                let (a, b) = self.ends(j + 1);
                self.q.trace_left(a, b, nb.h2)
            }
            None => zero,
        };
        Data { h1, h2 }
    }

    /// Composite field: node `n` is taken from the subdomain whose interval
    /// `[b_{j-1}, b_j)` contains it, the last node from subdomain `J`.
    fn composite(&self, d: &[Option<Data>]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.q.len()];
        for (j, dj) in d.iter().enumerate().map(|(i, v)| (i + 1, v)) {
            if let Some(dj) = dj {
                let (a, b) = self.ends(j);
                let u = self.q.solve(a, b, dj.h1, dj.h2);
                let stop = if j == self.n_sub() { b } else { b - 1 };
                out[a..=stop].copy_from_slice(&u[..=stop - a]);
            }
        }
        out
    }
}

/// Runs a subdomain iteration and returns the composite iterate after
/// every step.
///
/// `bounds` are node indices `b_0 = 0 < b_1 < … < b_J = len - 1` of the
/// interfaces. Jacobi and concurrent schedules run `steps` steps; the
/// double sweep returns the composite after its upward pass and after
/// its downward pass.
pub fn sweep_1d(
    k: f64,
    x: &[f64],
    bounds: &[usize],
    f: &[C64],
    schedule: Schedule,
    steps: usize,
) -> Result<Vec<Vec<C64>>> {
    let q = Quadrature1d::new(k, x, f)?;
    if bounds.len() < 2
        || bounds[0] != 0
        || *bounds.last().expect("nonempty") != q.len() - 1
        || bounds.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidPlan(format!("bounds {bounds:?} must increase from 0 to {}", q.len() - 1)));
    }
    let sw = Sweeper { q: &q, bounds };
    let n_sub = sw.n_sub();
    let mut d: Vec<Option<Data>> = vec![None; n_sub];
    let mut iterates = Vec::new();
    match schedule {
        Schedule::Jacobi => {
            for _ in 0..steps {
                d = (1..=n_sub).map(|j| Some(sw.incoming(&d, j))).collect();
                iterates.push(sw.composite(&d));
            }
        }
        Schedule::Concurrent => {
            for n in 1..=steps {
                let prev = d.clone();
                let m = (n - 1) % n_sub + 1;
                for j in [m, n_sub + 1 - m] {
                    d[j - 1] = Some(sw.incoming(&prev, j));
                }
                iterates.push(sw.composite(&d));
            }
        }
        Schedule::DoubleSweep => {
            for j in 1..=n_sub {
                d[j - 1] = Some(sw.incoming(&d, j));
            }
            iterates.push(sw.composite(&d));
            for j in (1..n_sub).rev() {
                d[j - 1] = Some(sw.incoming(&d, j));
            }
            iterates.push(sw.composite(&d));
        }
    }
    Ok(iterates)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, len: f64) -> Vec<f64> {
        (0..=n).map(|i| len * i as f64 / n as f64).collect()
    }

    fn sup(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn bump(x: &[f64], x0: f64, width: f64) -> Vec<C64> {
        let norm = 1.0 / (width * std::f64::consts::PI.sqrt());
        x.iter().map(|&t| C64::new(norm * (-((t - x0) / width).powi(2)).exp(), 0.0)).collect()
    }

    #[test]
    fn zero_data_gives_zero() {
        let x = grid(50, 1.0);
        let f = vec![C64::new(0.0, 0.0); x.len()];
        let z = C64::new(0.0, 0.0);
        let u = solution_formula_1d(7.0, &x, &f, z, z).unwrap();
        assert!(u.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn incoming_plane_wave() {
        let k = 7.0;
        let x = grid(50, 1.0);
        let f = vec![C64::new(0.0, 0.0); x.len()];
        let u = solution_formula_1d(k, &x, &f, C64::new(0.0, 2.0 * k), C64::new(0.0, 0.0)).unwrap();
        for (xi, ui) in x.iter().zip(&u) {
            assert!((ui - phase(k * xi)).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_wavenumber() {
        let x = grid(4, 1.0);
        let f = vec![C64::new(1.0, 0.0); x.len()];
        let z = C64::new(0.0, 0.0);
        assert!(solution_formula_1d(0.0, &x, &f, z, z).is_err());
        assert!(solution_formula_1d(-1.0, &x, &f, z, z).is_err());
    }

    #[test]
    fn narrowing_bump_approaches_green_function() {
        let k = 10.0;
        let x0 = 0.4;
        let x = grid(40_000, 1.0);
        let z = C64::new(0.0, 0.0);
        let green: Vec<C64> = x.iter().map(|&t| C64::new(0.0, 1.0 / (2.0 * k)) * phase(k * (t - x0).abs())).collect();
        let mut errs = Vec::new();
        for width in [0.04, 0.01, 0.0025] {
            let u = solution_formula_1d(k, &x, &bump(&x, x0, width), z, z).unwrap();
            errs.push(sup(&u, &green));
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-3, "{errs:?}");
    }

    #[test]
    fn traces_match_finite_differences() {
        let k = 6.0;
        let x = grid(20_000, 1.0);
        let f = bump(&x, 0.3, 0.05);
        let q = Quadrature1d::new(k, &x, &f).unwrap();
        let (h1, h2) = (C64::new(0.3, -0.2), C64::new(-0.5, 0.1));
        let (ia, ib) = (2000, 15000);
        let u = q.solve(ia, ib, h1, h2);
        let dx = x[1] - x[0];
        let n = u.len();
        let du_right = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx);
        let du_left = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
        let ik = C64::new(0.0, k);
        assert!((q.trace_right(ia, ib, h1) - (du_right + ik * u[n - 1])).norm() < 1e-5);
        assert!((q.trace_left(ia, ib, h2) - (-du_left + ik * u[0])).norm() < 1e-5);
        // the boundary conditions themselves
        assert!((du_left + ik * u[0] - h1).norm() < 1e-5);
        assert!((-du_right + ik * u[n - 1] - h2).norm() < 1e-5);
    }

    fn setup(j_count: usize) -> (f64, Vec<f64>, Vec<usize>, Vec<C64>) {
        let n = 600;
        let x = grid(n, 1.0);
        let bounds: Vec<usize> = (0..=j_count).map(|j| j * n / j_count).collect();
        // sources in the second subdomain and near the right end
        let mut f = bump(&x, (x[bounds[1]] + x[bounds[2.min(j_count)]]) / 2.0, 0.02);
        for (v, b) in f.iter_mut().zip(bump(&x, 0.9, 0.03)) {
            *v += b * 0.5;
        }
        (12.0, x, bounds, f)
    }

    #[test]
    fn jacobi_exact_after_j_steps() {
        let (k, x, bounds, f) = setup(4);
        let z = C64::new(0.0, 0.0);
        let exact = solution_formula_1d(k, &x, &f, z, z).unwrap();
        let it = sweep_1d(k, &x, &bounds, &f, Schedule::Jacobi, 5).unwrap();
        assert!(sup(&it[1], &exact) > 1e-3);
        assert!(sup(&it[3], &exact) <= 1e-8);
        assert!(sup(&it[4], &exact) <= 1e-8);
    }

    #[test]
    fn single_subdomain_is_exact_at_once() {
        let (k, x, _, f) = setup(4);
        let z = C64::new(0.0, 0.0);
        let exact = solution_formula_1d(k, &x, &f, z, z).unwrap();
        let bounds = [0, x.len() - 1];
        for s in [Schedule::Jacobi, Schedule::Concurrent, Schedule::DoubleSweep] {
            let it = sweep_1d(k, &x, &bounds, &f, s, 1).unwrap();
            assert!(sup(&it[0], &exact) <= 1e-12);
        }
    }

    #[test]
    fn jacobi_iterates_are_truncated_formulas() {
        for j_count in 1..=6 {
            let (k, x, bounds, f) = setup(j_count);
            let q = Quadrature1d::new(k, &x, &f).unwrap();
            let z = C64::new(0.0, 0.0);
            let it = sweep_1d(k, &x, &bounds, &f, Schedule::Jacobi, j_count).unwrap();
            for (step, v) in it.iter().enumerate() {
                let n = step + 1;
                for j in 1..=j_count {
                    let lo = bounds[j.saturating_sub(n)];
                    let hi = bounds[(j + n - 1).min(j_count)];
                    // truncated-domain formula: integrals over ]lo, hi[ only
                    let want = q.solve(lo, hi, z, z);
                    let (a, b) = (bounds[j - 1], if j == j_count { bounds[j] } else { bounds[j] - 1 });
                    assert!(sup(&v[a..=b], &want[a - lo..=b - lo]) <= 1e-8, "J={j_count} n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn double_sweep_exact_after_one_pass() {
        let (k, x, bounds, f) = setup(4);
        let z = C64::new(0.0, 0.0);
        let exact = solution_formula_1d(k, &x, &f, z, z).unwrap();
        let it = sweep_1d(k, &x, &bounds, &f, Schedule::DoubleSweep, 1).unwrap();
        assert_eq!(it.len(), 2);
        assert!(sup(&it[0], &exact) > 1e-3);
        assert!(sup(&it[1], &exact) <= 1e-8);
    }

    #[test]
    fn concurrent_exact_at_j() {
        for j_count in [3, 4, 5] {
            let (k, x, bounds, f) = setup(j_count);
            let z = C64::new(0.0, 0.0);
            let exact = solution_formula_1d(k, &x, &f, z, z).unwrap();
            let it = sweep_1d(k, &x, &bounds, &f, Schedule::Concurrent, j_count).unwrap();
            assert!(sup(&it[j_count - 1], &exact) <= 1e-8, "J={j_count}");
            assert!(sup(&it[j_count / 2 - 1], &exact) > 1e-3, "J={j_count}");
        }
    }

    #[test]
    fn rejects_bad_bounds() {
        let (k, x, _, f) = setup(2);
        assert!(sweep_1d(k, &x, &[0, 300, 300, 600], &f, Schedule::Jacobi, 1).is_err());
        assert!(sweep_1d(k, &x, &[1, 600], &f, Schedule::Jacobi, 1).is_err());
    }
}
