#![allow(dead_code)]

use helmsweep::bench::prng::SplitMix64;
use helmsweep::C64;
use nalgebra::{DMatrix, DVector};

pub fn random_vec(rng: &mut SplitMix64, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.next_unit() - 0.5, rng.next_unit() - 0.5)).collect()
}

/// Row-major `rows × cols` matrix as an nalgebra matrix.
pub fn dense(rows: usize, cols: usize, a: &[C64]) -> DMatrix<C64> {
    DMatrix::from_row_slice(rows, cols, a)
}

pub fn rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

pub fn matvec(a: &DMatrix<C64>, x: &[C64]) -> Vec<C64> {
    (a * DVector::from_column_slice(x)).iter().copied().collect()
}
