//! Block-tridiagonal LU for the strip-shaped subdomain systems.
//!
//! Blocks are grid rows, so the block size is the (small) subdomain width
//! and the factorization cost is linear in the number of rows. Diagonal
//! Schur complements are factored with partial pivoting inside each block;
//! there is no pivoting across blocks.

use crate::error::{Error, Result};
use crate::C64;

/// Dense LU of a square block with row pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factors the row-major `n × n` matrix `a`. Returns `None` when a pivot
    /// is zero to machine precision relative to the largest entry.
    pub fn factor(n: usize, mut a: Vec<C64>) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tiny = scale * f64::EPSILON * n as f64;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, a[k * n + k].norm());
            for i in k + 1..n {
                let v = a[i * n + k].norm();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if best.is_nan() || best <= tiny {
                return None;
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let inv = C64::new(1.0, 0.0) / a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] * inv;
                a[i * n + k] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let (top, bottom) = a.split_at_mut(i * n);
                let pivot_row = &top[k * n + k + 1..k * n + n];
                for (x, y) in bottom[k + 1..n].iter_mut().zip(pivot_row) {
                    *x -= l * y;
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Solves in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: C64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..i * n + n];
            let s: C64 = row.iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        b.copy_from_slice(&x);
    }

    /// Solves `A X = B` for a row-major `n × m` right-hand side.
    pub fn solve_matrix(&self, b: &[C64], m: usize) -> Vec<C64> {
        let n = self.n;
        let mut x = vec![C64::new(0.0, 0.0); n * m];
        for (i, &p) in self.perm.iter().enumerate() {
            x[i * m..(i + 1) * m].copy_from_slice(&b[p * m..(p + 1) * m]);
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let (top, bottom) = x.split_at_mut(i * m);
                for (xi, xk) in bottom[..m].iter_mut().zip(&top[k * m..(k + 1) * m]) {
                    *xi -= l * xk;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                if u == C64::new(0.0, 0.0) {
                    continue;
                }
                let (top, bottom) = x.split_at_mut(k * m);
                for (xi, xk) in top[i * m..(i + 1) * m].iter_mut().zip(&bottom[..m]) {
                    *xi -= u * xk;
                }
            }
            let inv = C64::new(1.0, 0.0) / self.lu[i * n + i];
            x[i * m..(i + 1) * m].iter_mut().for_each(|v| *v *= inv);
        }
        x
    }
}

/// `n_blocks` rows of dense `m × m` blocks: `L_r x_{r-1} + D_r x_r + U_r x_{r+1}`.
#[derive(Debug, Clone)]
pub struct BlockTridiagonalMatrix {
    pub m: usize,
    pub diag: Vec<Vec<C64>>,
    /// `lower[0]` is ignored.
    pub lower: Vec<Vec<C64>>,
    /// `upper[n_blocks - 1]` is ignored.
    pub upper: Vec<Vec<C64>>,
}

impl BlockTridiagonalMatrix {
    pub fn new(m: usize, diag: Vec<Vec<C64>>, lower: Vec<Vec<C64>>, upper: Vec<Vec<C64>>) -> Result<Self> {
        let nb = diag.len();
        if nb == 0 || lower.len() != nb || upper.len() != nb {
            return Err(Error::InvalidArgument("block counts disagree".into()));
        }
        if diag.iter().chain(&lower).chain(&upper).any(|b| b.len() != m * m) {
            return Err(Error::InvalidArgument(format!("blocks must be {m}x{m}")));
        }
        Ok(Self { m, diag, lower, upper })
    }

    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        self.m * self.n_blocks()
    }

    pub fn multiply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(Error::ShapeMismatch { expected: format!("{}", self.dim()), got: format!("{}", x.len()) });
        }
        let (m, nb) = (self.m, self.n_blocks());
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        for r in 0..nb {
            let yr = &mut y[r * m..(r + 1) * m];
            gemv_add(&self.diag[r], &x[r * m..(r + 1) * m], yr, m);
            if r > 0 {
                gemv_add(&self.lower[r], &x[(r - 1) * m..r * m], yr, m);
            }
            if r + 1 < nb {
                gemv_add(&self.upper[r], &x[(r + 1) * m..(r + 2) * m], yr, m);
            }
        }
        Ok(y)
    }

    /// Dense row-major copy; intended for small test systems.
    pub fn to_dense(&self) -> Vec<C64> {
        let (m, nb) = (self.m, self.n_blocks());
        let n = m * nb;
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        let mut put = |br: usize, bc: usize, blk: &[C64]| {
            for i in 0..m {
                for k in 0..m {
                    a[(br * m + i) * n + bc * m + k] = blk[i * m + k];
                }
            }
        };
        for r in 0..nb {
            put(r, r, &self.diag[r]);
            if r > 0 {
                put(r, r - 1, &self.lower[r]);
            }
            if r + 1 < nb {
                put(r, r + 1, &self.upper[r]);
            }
        }
        a
    }
}

fn gemv_add(a: &[C64], x: &[C64], y: &mut [C64], m: usize) {
    for (i, yi) in y.iter_mut().enumerate() {
        let row = &a[i * m..(i + 1) * m];
        *yi += row.iter().zip(x).map(|(a, b)| a * b).sum::<C64>();
    }
}

/// Block LU factors: `S_r` (pivoted LU), `G_r = S_r^{-1} U_r` and the
/// lower blocks needed for forward substitution.
#[derive(Debug, Clone)]
pub struct Factorization {
    m: usize,
    schur: Vec<DenseLu>,
    gain: Vec<Vec<C64>>,
    lower: Vec<Vec<C64>>,
}

/// Forward block elimination `S_1 = D_1`, `S_r = D_r - L_r S_{r-1}^{-1} U_{r-1}`.
pub fn factor(mat: &BlockTridiagonalMatrix) -> Result<Factorization> {
    let (m, nb) = (mat.m, mat.n_blocks());
    let mut schur = Vec::with_capacity(nb);
    let mut gain = Vec::with_capacity(nb.saturating_sub(1));
    let mut s = mat.diag[0].clone();
    for r in 0..nb {
        let lu = DenseLu::factor(m, std::mem::take(&mut s)).ok_or(Error::SingularBlock { block: r + 1 })?;
        if r + 1 < nb {
            let g = lu.solve_matrix(&mat.upper[r], m);
            let mut next = mat.diag[r + 1].clone();
            let low = &mat.lower[r + 1];
            for i in 0..m {
                for k in 0..m {
                    let l = low[i * m + k];
                    if l == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let grow = &g[k * m..(k + 1) * m];
                    for (dst, gv) in next[i * m..(i + 1) * m].iter_mut().zip(grow) {
                        *dst -= l * gv;
                    }
                }
            }
            gain.push(g);
            s = next;
        }
        schur.push(lu);
    }
    Ok(Factorization { m, schur, gain, lower: mat.lower.clone() })
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.m * self.schur.len()
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.dim() {
            return Err(Error::ShapeMismatch { expected: format!("{}", self.dim()), got: format!("{}", b.len()) });
        }
        let (m, nb) = (self.m, self.schur.len());
        let mut x = b.to_vec();
        for r in 0..nb {
            if r > 0 {
                let (prev, cur) = x.split_at_mut(r * m);
                let low = &self.lower[r];
                let yprev = &prev[(r - 1) * m..];
                for (i, xi) in cur[..m].iter_mut().enumerate() {
                    *xi -= low[i * m..(i + 1) * m].iter().zip(yprev).map(|(a, b)| a * b).sum::<C64>();
                }
            }
            self.schur[r].solve_in_place(&mut x[r * m..(r + 1) * m]);
        }
        for r in (0..nb.saturating_sub(1)).rev() {
            let (cur, next) = x.split_at_mut((r + 1) * m);
            let g = &self.gain[r];
            let xn = &next[..m];
            for (i, xi) in cur[r * m..].iter_mut().enumerate() {
                *xi -= g[i * m..(i + 1) * m].iter().zip(xn).map(|(a, b)| a * b).sum::<C64>();
            }
        }
        Ok(x)
    }

    /// Solve followed by one step of iterative refinement against `mat`.
    pub fn solve_refined(&self, mat: &BlockTridiagonalMatrix, b: &[C64]) -> Result<Vec<C64>> {
        let mut x = self.solve(b)?;
        let ax = mat.multiply(&x)?;
        let r: Vec<C64> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        let dx = self.solve(&r)?;
        x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_vec(n: usize, seed: u64) -> Vec<C64> {
        let mut s = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| c(next(), next())).collect()
    }

    fn identity(m: usize) -> Vec<C64> {
        let mut a = vec![c(0.0, 0.0); m * m];
        (0..m).for_each(|i| a[i * m + i] = c(1.0, 0.0));
        a
    }

    #[test]
    fn identity_single_block() {
        let mat =
            BlockTridiagonalMatrix::new(3, vec![identity(3)], vec![vec![c(0.0, 0.0); 9]], vec![vec![c(0.0, 0.0); 9]])
                .unwrap();
        let f = factor(&mat).unwrap();
        let b = rand_vec(3, 1);
        assert_eq!(f.solve(&b).unwrap(), b);
    }

    #[test]
    fn singular_block_reported() {
        let z = vec![c(0.0, 0.0); 4];
        let mat = BlockTridiagonalMatrix::new(2, vec![z.clone()], vec![z.clone()], vec![z]).unwrap();
        assert!(matches!(factor(&mat), Err(Error::SingularBlock { block: 1 })));
    }

    #[test]
    fn zero_rhs_and_ones() {
        let m = 4;
        let nb = 6;
        let mut diag = Vec::new();
        for r in 0..nb {
            let mut d = rand_vec(m * m, r as u64);
            (0..m).for_each(|i| d[i * m + i] += c(4.0, 1.0));
            diag.push(d);
        }
        let lower = (0..nb).map(|r| rand_vec(m * m, 100 + r as u64)).collect();
        let upper = (0..nb).map(|r| rand_vec(m * m, 200 + r as u64)).collect();
        let mat = BlockTridiagonalMatrix::new(m, diag, lower, upper).unwrap();
        let f = factor(&mat).unwrap();
        let zero = f.solve(&vec![c(0.0, 0.0); m * nb]).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
        let ones = vec![c(1.0, 0.0); m * nb];
        let b = mat.multiply(&ones).unwrap();
        let x = f.solve(&b).unwrap();
        assert!(x.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-10));
        assert_eq!(x, f.solve(&b).unwrap());
        let xr = f.solve_refined(&mat, &b).unwrap();
        assert!(xr.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-12));
        assert!(f.solve(&ones[1..]).is_err());
    }

    #[test]
    fn pivoting_needed_block() {
        // zero leading entry forces a row swap
        let d = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let z = vec![c(0.0, 0.0); 4];
        let mat = BlockTridiagonalMatrix::new(2, vec![d], vec![z.clone()], vec![z]).unwrap();
        let f = factor(&mat).unwrap();
        assert_eq!(f.solve(&[c(2.0, 0.0), c(3.0, 0.0)]).unwrap(), vec![c(3.0, 0.0), c(2.0, 0.0)]);
    }
}
