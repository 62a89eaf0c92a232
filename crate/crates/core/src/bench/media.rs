//! Reproducible media and sources.

use crate::bench::prng::SplitMix64;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D, Medium};
use crate::C64;

/// Default random-medium parameters.
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_AMPLITUDE: f64 = 0.25;
pub const DEFAULT_SMOOTHING: usize = 5;

/// Speeds `1 + a (2r - 1)` drawn row-major (x fastest), then smoothed by
/// `passes` applications of the 3×3 binomial kernel with clamped edges.
pub fn random_speeds(grid: &Grid2D, seed: u64, amplitude: f64, passes: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::InvalidMedium(format!("amplitude {amplitude} must lie in [0, 1)")));
    }
    let (nx, ny) = (grid.n_x, grid.n_y);
    let mut rng = SplitMix64::new(seed);
    let mut c: Vec<f64> = (0..nx * ny).map(|_| 1.0 + amplitude * (2.0 * rng.next_unit() - 1.0)).collect();
    let w = [1.0, 2.0, 1.0];
    let mut tmp = vec![0.0; nx * ny];
    for _ in 0..passes {
        for r in 0..ny {
            for i in 0..nx {
                let mut acc = 0.0;
                for (dr, wr) in w.iter().enumerate() {
                    let rr = (r + dr).saturating_sub(1).min(ny - 1);
                    for (di, wi) in w.iter().enumerate() {
                        let ii = (i + di).saturating_sub(1).min(nx - 1);
                        acc += wr * wi * c[rr * nx + ii];
                    }
                }
                tmp[r * nx + i] = acc / 16.0;
            }
        }
        std::mem::swap(&mut c, &mut tmp);
    }
    Ok(c)
}

pub fn generate_random_medium(grid: &Grid2D, omega: f64, seed: u64, amplitude: f64, passes: usize) -> Result<Medium> {
    Medium::new(omega, grid.n_x, grid.n_y, random_speeds(grid, seed, amplitude, passes)?)
}

/// Horizontal layers: row `r` (1-based) takes `speeds[n]` where `n` counts
/// the interface rows `≤ r`.
pub fn layered_medium(grid: &Grid2D, omega: f64, speeds: &[f64], interfaces: &[usize]) -> Result<Medium> {
    if speeds.len() != interfaces.len() + 1 {
        return Err(Error::InvalidMedium("need one more speed than interfaces".into()));
    }
    let mut c = Vec::with_capacity(grid.len());
    for r in 1..=grid.n_y {
        let layer = interfaces.iter().filter(|&&b| b <= r).count();
        c.extend(std::iter::repeat_n(speeds[layer], grid.n_x));
    }
    Medium::new(omega, grid.n_x, grid.n_y, c)
}

/// Center of the grid in 1-based node numbers.
pub fn default_source_node(grid: &Grid2D) -> (usize, usize) {
    (grid.n_x.div_ceil(2), grid.n_y.div_ceil(2))
}

/// Point source `1/h²` at the 1-based node `(col, row)`.
pub fn point_source(grid: &Grid2D, col: usize, row: usize) -> Result<Field> {
    if col == 0 || row == 0 || col > grid.n_x || row > grid.n_y {
        return Err(Error::InvalidArgument(format!("source node ({col}, {row}) outside the grid")));
    }
    if grid.in_exterior_pml(col, row) {
        return Err(Error::InvalidArgument(format!("source node ({col}, {row}) inside exterior PML")));
    }
    let mut f = Field::zeros_like(grid);
    f.set(col - 1, row - 1, C64::new(1.0 / (grid.h * grid.h), 0.0));
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::YBoundary;

    #[test]
    fn zero_amplitude_is_constant() {
        let g = Grid2D::with_interior(20, 20, 0.05, 4, YBoundary::Pml).unwrap();
        assert!(random_speeds(&g, 7, 0.0, 5).unwrap().iter().all(|&c| c == 1.0));
        assert!(random_speeds(&g, 7, 1.0, 5).is_err());
    }

    #[test]
    fn smoothing_stays_in_bounds() {
        let g = Grid2D::with_interior(30, 25, 0.05, 4, YBoundary::Pml).unwrap();
        for passes in [0, 1, 5] {
            let c = random_speeds(&g, 3, 0.25, passes).unwrap();
            assert!(c.iter().all(|&v| (0.75..=1.25).contains(&v)));
        }
    }

    #[test]
    fn default_medium_checksum() {
        let g = Grid2D::new(100, 100, 0.01, 0, YBoundary::Pml).unwrap();
        let c = random_speeds(&g, DEFAULT_SEED, DEFAULT_AMPLITUDE, DEFAULT_SMOOTHING).unwrap();
        let sum: f64 = c.iter().sum();
        let weighted: f64 = c.iter().enumerate().map(|(p, v)| (p % 97) as f64 * v).sum();
        assert!((sum - CHECK_SUM).abs() < 1e-9, "{sum:.15e}");
        assert!((weighted - CHECK_WEIGHTED).abs() < 1e-7, "{weighted:.15e}");
    }

    const CHECK_SUM: f64 = 1.001019108212975e4;
    const CHECK_WEIGHTED: f64 = 4.797797817104921e5;

    #[test]
    fn point_source_defaults() {
        let g = Grid2D::with_interior(100, 100, 0.01, 4, YBoundary::Pml).unwrap();
        let (c, r) = default_source_node(&g);
        assert_eq!((c, r), (54, 54));
        let f = point_source(&g, c, r).unwrap();
        assert!((f.get(53, 53).re - 1e4).abs() < 1e-9);
        let total: C64 = f.values.iter().sum();
        assert!((total.re - 1e4).abs() < 1e-9);
        assert!(point_source(&g, 1, 1).is_err());
    }

    #[test]
    fn layered_rows() {
        let g = Grid2D::new(10, 6, 0.1, 2, YBoundary::Dirichlet).unwrap();
        let m = layered_medium(&g, 1.0, &[1.0, 2.0], &[4]).unwrap();
        assert_eq!(m.speed(0, 2), 1.0);
        assert_eq!(m.speed(5, 3), 2.0);
    }
}
