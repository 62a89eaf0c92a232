//! Full (non-restarted) GMRES over complex vectors.
//!
//! Arnoldi uses modified Gram–Schmidt with the inner product conjugate
//! in its first argument; the small least-squares problem is kept upper
//! triangular with complex Givens rotations. The initial guess is zero.

use crate::grid::norm2;
use crate::C64;

/// Convergence record of one GMRES run.
#[derive(Debug, Clone, PartialEq)]
pub struct GmresReport {
    pub iterations: usize,
    /// Relative residual `‖b - A x_k‖ / ‖b‖` for `k = 0..=iterations`, as
    /// tracked by the Givens recurrence.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl GmresReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

#[inline]
fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solves `apply(x) = b` to relative residual `tol`.
///
/// On exhaustion of `max_iter` the best iterate is returned with
/// `converged = false`. An Arnoldi breakdown ends the iteration; the
/// flag then reflects whether the recurrence residual met `tol`.
pub fn gmres<F, E>(mut apply: F, b: &[C64], tol: f64, max_iter: usize) -> Result<(Vec<C64>, GmresReport), E>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>, E>,
{
    let n = b.len();
    let zero = C64::new(0.0, 0.0);
    let beta = norm2(b);
    if beta == 0.0 {
        let report = GmresReport { iterations: 0, residual_history: vec![0.0], converged: true };
        return Ok((vec![zero; n], report));
    }

    let mut basis: Vec<Vec<C64>> = vec![b.iter().map(|v| v / beta).collect()];
    // columns of the Hessenberg matrix after rotation
    let mut hess: Vec<Vec<C64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<C64> = Vec::new();
    let mut g = vec![C64::new(beta, 0.0)];
    let mut history = vec![1.0];
    let mut converged = false;
    let mut iters = 0;

    for k in 0..max_iter {
        let mut w = apply(&basis[k])?;
        let mut col = Vec::with_capacity(k + 2);
        let w_norm0 = norm2(&w);
        for v in &basis {
            let hij = dot(v, &w);
            w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
            col.push(hij);
        }
        let hnext = norm2(&w);
        col.push(C64::new(hnext, 0.0));

        for i in 0..k {
            let (a, bb) = (col[i], col[i + 1]);
            col[i] = cs[i] * a + sn[i] * bb;
            col[i + 1] = -sn[i].conj() * a + cs[i] * bb;
        }
        let (a, bb) = (col[k], col[k + 1]);
        let r = (a.norm_sqr() + bb.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (1.0, zero)
        } else if a.norm() == 0.0 {
            (0.0, bb.conj() / r)
        } else {
            let an = a.norm();
            (an / r, (a / an) * bb.conj() / r)
        };
        col[k] = c * a + s * bb;
        col[k + 1] = zero;
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s.conj() * gk);
        hess.push(col);

        iters = k + 1;
        let res = g[k + 1].norm() / beta;
        history.push(res);
        let breakdown = hnext <= 1e-14 * w_norm0.max(f64::MIN_POSITIVE);
        if res <= tol || breakdown {
            converged = res <= tol;
            break;
        }
        basis.push(w.iter().map(|v| v / hnext).collect());
    }

    // back substitution on the triangular system
    let m = iters;
    let mut y = vec![zero; m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for (j, yj) in y.iter().enumerate().take(m).skip(i + 1) {
            s -= hess[j][i] * yj;
        }
        y[i] = if hess[i][i] == zero { zero } else { s / hess[i][i] };
    }
    let mut x = vec![zero; n];
    for (v, yj) in basis.iter().zip(&y) {
        x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += yj * vi);
    }
    Ok((x, GmresReport { iterations: iters, residual_history: history, converged }))
}
