//! Grid geometry, medium, PML damping profile and subdomain bookkeeping.
//!
//! Column and row numbers exposed by [`DecompositionPlan`] are 1-based
//! (columns `1..=n_x`, rows `1..=n_y`). Storage in [`Field`] is 0-based
//! with the x index fastest: column `c`, row `r` lives at
//! `(r - 1) * n_x + (c - 1)`.

use crate::error::{Error, Result};
use crate::C64;

/// Boundary treatment along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YBoundary {
    /// Exterior PML of `w_ext` rows on the bottom and top.
    Pml,
    /// Homogeneous Dirichlet rows just outside the grid.
    Dirichlet,
}

/// Uniform rectangular grid, exterior PML included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub n_x: usize,
    pub n_y: usize,
    pub h: f64,
    pub w_ext: usize,
    pub y_boundary: YBoundary,
}

impl Grid2D {
    pub fn new(n_x: usize, n_y: usize, h: f64, w_ext: usize, y_boundary: YBoundary) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing h = {h} must be positive")));
        }
        if n_x < 2 * w_ext + 3 {
            return Err(Error::InvalidGrid(format!("n_x = {n_x} too small for exterior PML width {w_ext}")));
        }
        let min_y = match y_boundary {
            YBoundary::Pml => (2 * w_ext + 3).max(3),
            YBoundary::Dirichlet => 3,
        };
        if n_y < min_y {
            return Err(Error::InvalidGrid(format!("n_y = {n_y} below minimum {min_y}")));
        }
        Ok(Self { n_x, n_y, h, w_ext, y_boundary })
    }

    /// Grid for an interior of `n_core_x × n_core_y` points with exterior
    /// PML added on the x sides (and y sides when `y_boundary` is PML).
    pub fn with_interior(
        n_core_x: usize,
        n_core_y: usize,
        h: f64,
        w_ext: usize,
        y_boundary: YBoundary,
    ) -> Result<Self> {
        let n_y = match y_boundary {
            YBoundary::Pml => n_core_y + 2 * w_ext,
            YBoundary::Dirichlet => n_core_y,
        };
        Self::new(n_core_x + 2 * w_ext, n_y, h, w_ext, y_boundary)
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exterior PML rows on each y side (zero in Dirichlet mode).
    pub fn w_ext_y(&self) -> usize {
        match self.y_boundary {
            YBoundary::Pml => self.w_ext,
            YBoundary::Dirichlet => 0,
        }
    }

    /// True when the 1-based node lies in an exterior PML layer.
    pub fn in_exterior_pml(&self, col: usize, row: usize) -> bool {
        let wy = self.w_ext_y();
        col <= self.w_ext || col > self.n_x - self.w_ext || row <= wy || row > self.n_y - wy
    }
}

/// Wave-speed field and angular frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    pub omega: f64,
    pub n_x: usize,
    pub n_y: usize,
    /// Speeds, x fastest.
    pub c: Vec<f64>,
}

impl Medium {
    pub fn new(omega: f64, n_x: usize, n_y: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != n_x * n_y {
            return Err(Error::ShapeMismatch {
                expected: format!("{} speeds", n_x * n_y),
                got: format!("{}", c.len()),
            });
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidMedium(format!("omega = {omega} must be positive")));
        }
        if let Some(bad) = c.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidMedium(format!("speed {bad} is not positive and finite")));
        }
        Ok(Self { omega, n_x, n_y, c })
    }

    pub fn constant(grid: &Grid2D, omega: f64, c: f64) -> Result<Self> {
        Self::new(omega, grid.n_x, grid.n_y, vec![c; grid.len()])
    }

    /// Speed at 0-based `(i, r)`.
    #[inline]
    pub fn speed(&self, i: usize, r: usize) -> f64 {
        self.c[r * self.n_x + i]
    }

    /// Wavenumber `omega / c` at 0-based `(i, r)`.
    #[inline]
    pub fn k(&self, i: usize, r: usize) -> f64 {
        self.omega / self.speed(i, r)
    }
}

/// How strongly a PML layer damps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping {
    /// Fixed target reflection coefficient for every layer; `1.0` disables
    /// damping.
    Reflection(f64),
    /// Target reflection `exp(-κ w)` for a layer `w` points wide, which
    /// keeps `σ_max h / c` independent of the width.
    PerPoint(f64),
}

impl Damping {
    pub const DEFAULT_KAPPA: f64 = 1.0;

    /// Target reflection coefficient of a layer `width` points wide.
    pub fn r_target(&self, width: usize) -> f64 {
        match *self {
            Damping::Reflection(r) => r,
            Damping::PerPoint(kappa) => (-kappa * width as f64).exp(),
        }
    }
}

impl Default for Damping {
    fn default() -> Self {
        Damping::PerPoint(Self::DEFAULT_KAPPA)
    }
}

/// Interior PML width and damping strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlSpec {
    pub w_pml: usize,
    pub damping: Damping,
}

impl PmlSpec {
    pub fn new(w_pml: usize) -> Self {
        Self { w_pml, damping: Damping::default() }
    }

    pub fn with_reflection(w_pml: usize, r_target: f64) -> Self {
        Self { w_pml, damping: Damping::Reflection(r_target) }
    }

    /// Damping disabled everywhere.
    pub fn undamped(w_pml: usize) -> Self {
        Self::with_reflection(w_pml, 1.0)
    }
}

/// Peak damping `3 c ln(1/R) / (2 L)` of a quadratic profile over a layer
/// of physical length `layer_len`.
pub fn sigma_max(r_target: f64, layer_len: f64, c_ref: f64) -> f64 {
    if layer_len <= 0.0 {
        return 0.0;
    }
    3.0 * c_ref * (1.0 / r_target).ln() / (2.0 * layer_len)
}

/// Damping `σ_max ξ²` at depth fraction `ξ ∈ [0, 1]`.
pub fn sigma_profile(r_target: f64, layer_len: f64, depth_fraction: f64, c_ref: f64) -> f64 {
    let xi = depth_fraction.clamp(0.0, 1.0);
    sigma_max(r_target, layer_len, c_ref) * xi * xi
}

/// Complex stretch `1 / (1 + iσ/ω)`.
#[inline]
pub fn alpha(sigma: f64, omega: f64) -> C64 {
    if sigma == 0.0 {
        return C64::new(1.0, 0.0);
    }
    C64::new(1.0, 0.0) / C64::new(1.0, sigma / omega)
}

/// Which side of its boundary a PML layer occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSide {
    /// Occupies coordinates below the boundary.
    Low,
    /// Occupies coordinates above the boundary.
    High,
}

/// A PML layer along one axis, positioned in grid-index units.
///
/// `boundary` is a half-integer position (e.g. `β + 0.5`); a grid point at
/// position `p` has depth `|p - boundary| / width` on the occupied side.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub boundary: f64,
    pub width: usize,
    pub side: LayerSide,
}

impl Layer {
    pub fn depth_fraction(&self, pos: f64) -> f64 {
        if self.width == 0 {
            return 0.0;
        }
        let d = match self.side {
            LayerSide::Low => self.boundary - pos,
            LayerSide::High => pos - self.boundary,
        };
        if d <= 0.0 {
            0.0
        } else {
            (d / self.width as f64).min(1.0)
        }
    }
}

/// Subdomain grid: core columns plus interior PML pads.
///
/// Pad columns may carry virtual column numbers outside `1..=n_x`; they
/// hold the x-independent extension of the medium and never touch global
/// data.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainGrid {
    /// 1-based subdomain index.
    pub index: usize,
    /// Global column number of local column 0 (may be ≤ 0 for pads).
    pub first_col: i64,
    /// Total width in columns (pads + core + any exterior PML).
    pub width: usize,
    /// First/last real global columns held by the grid (exterior PML included).
    pub real_lo: usize,
    pub real_hi: usize,
    /// Core column range `β_{j-1}+1 ..= β̃_j`.
    pub core_lo: usize,
    pub core_hi: usize,
    pub left_pad: usize,
    pub right_pad: usize,
}

impl SubdomainGrid {
    /// Local column of a global column, if inside this grid.
    pub fn local(&self, col: i64) -> Option<usize> {
        let l = col - self.first_col;
        (l >= 0 && (l as usize) < self.width).then_some(l as usize)
    }

    /// Global column of a local column.
    pub fn global(&self, local: usize) -> i64 {
        self.first_col + local as i64
    }
}

/// Interface positions and per-subdomain grids.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionPlan {
    pub n_sub: usize,
    pub n_x: usize,
    pub w_ext: usize,
    pub w_pml: usize,
    /// `β_0 ..= β_J`.
    pub beta: Vec<usize>,
    /// `β̃_0 ..= β̃_J`.
    pub beta_tilde: Vec<usize>,
    /// Subdomains `1..=J`, stored at positions `0..J`.
    pub subdomains: Vec<SubdomainGrid>,
}

impl DecompositionPlan {
    pub fn subdomain(&self, j: usize) -> &SubdomainGrid {
        &self.subdomains[j - 1]
    }

    /// Global column range `(lo, hi)` owned by subdomain `j` in the upward
    /// (β) partition; the first and last ranges absorb the exterior PML.
    pub fn upward_range(&self, j: usize) -> (usize, usize) {
        self.owned_range(&self.beta, j)
    }

    /// Same for the downward (β̃) partition.
    pub fn downward_range(&self, j: usize) -> (usize, usize) {
        self.owned_range(&self.beta_tilde, j)
    }

    fn owned_range(&self, b: &[usize], j: usize) -> (usize, usize) {
        let lo = if j == 1 { 1 } else { b[j - 1] + 1 };
        let hi = if j == self.n_sub { self.n_x } else { b[j] };
        (lo, hi)
    }

    /// 1-based interface-layer columns `β_j + 1, β_j + 2` for `j = 1..J-1`.
    pub fn interface_columns(&self) -> Vec<usize> {
        (1..self.n_sub).flat_map(|j| [self.beta[j] + 1, self.beta[j] + 2]).collect()
    }
}

/// Splits the interior columns into `n_sub` slabs of near-equal width.
///
/// Interior interfaces use `β_j = round(w_ext + j (n_x - 2 w_ext - 1) / J)`
/// rounded half away from zero; the endpoints are pinned to `w_ext` and
/// `n_x - w_ext`.
pub fn plan_decomposition(grid: &Grid2D, n_sub: usize, w_pml: usize) -> Result<DecompositionPlan> {
    if n_sub == 0 {
        return Err(Error::InvalidPlan("need at least one subdomain".into()));
    }
    let n_x = grid.n_x;
    let w = grid.w_ext;
    let span = (n_x - 2 * w - 1) as u64;
    let mut beta = Vec::with_capacity(n_sub + 1);
    beta.push(w);
    for j in 1..n_sub {
        let num = j as u64 * span;
        let jj = n_sub as u64;
        // floor(num/J + 1/2) == round-half-away for nonnegative values
        beta.push(w + ((2 * num + jj) / (2 * jj)) as usize);
    }
    beta.push(n_x - w);
    for j in 1..=n_sub {
        if beta[j] < beta[j - 1] + 2 {
            return Err(Error::InvalidPlan(format!(
                "subdomain {j} core has {} columns, need at least 2",
                beta[j] as i64 - beta[j - 1] as i64
            )));
        }
    }
    let mut beta_tilde = beta.clone();
    for bt in beta_tilde.iter_mut().take(n_sub).skip(1) {
        *bt += 1;
    }

    let subdomains = (1..=n_sub)
        .map(|j| {
            let core_lo = beta[j - 1] + 1;
            let core_hi = beta_tilde[j];
            let (left_pad, real_lo) = if j == 1 { (0, 1) } else { (w_pml, core_lo) };
            let (right_pad, real_hi) = if j == n_sub { (0, n_x) } else { (w_pml, core_hi) };
            let first_col = real_lo as i64 - left_pad as i64;
            SubdomainGrid {
                index: j,
                first_col,
                width: left_pad + (real_hi - real_lo + 1) + right_pad,
                real_lo,
                real_hi,
                core_lo,
                core_hi,
                left_pad,
                right_pad,
            }
        })
        .collect();

    Ok(DecompositionPlan { n_sub, n_x, w_ext: w, w_pml, beta, beta_tilde, subdomains })
}

/// Speeds on the grid of subdomain `j`: the global medium on real columns,
/// extended constantly in x into the interior PML pads.
pub fn extend_medium(medium: &Medium, plan: &DecompositionPlan, j: usize) -> Vec<f64> {
    let sd = plan.subdomain(j);
    let mut out = Vec::with_capacity(sd.width * medium.n_y);
    for r in 0..medium.n_y {
        for l in 0..sd.width {
            let col = sd.global(l).clamp(sd.real_lo as i64, sd.real_hi as i64) as usize;
            out.push(medium.speed(col - 1, r));
        }
    }
    out
}

/// Complex grid function, x index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub n_x: usize,
    pub n_y: usize,
    pub values: Vec<C64>,
}

impl Field {
    pub fn zeros(n_x: usize, n_y: usize) -> Self {
        Self { n_x, n_y, values: vec![C64::new(0.0, 0.0); n_x * n_y] }
    }

    pub fn zeros_like(grid: &Grid2D) -> Self {
        Self::zeros(grid.n_x, grid.n_y)
    }

    pub fn from_values(n_x: usize, n_y: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != n_x * n_y {
            return Err(Error::ShapeMismatch {
                expected: format!("{n_x}x{n_y}"),
                got: format!("{} values", values.len()),
            });
        }
        Ok(Self { n_x, n_y, values })
    }

    #[inline]
    pub fn idx(&self, i: usize, r: usize) -> usize {
        r * self.n_x + i
    }

    /// Value at 0-based `(i, r)`.
    #[inline]
    pub fn get(&self, i: usize, r: usize) -> C64 {
        self.values[r * self.n_x + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, r: usize, v: C64) {
        let n = self.n_x;
        self.values[r * n + i] = v;
    }

    pub fn check_shape(&self, n_x: usize, n_y: usize) -> Result<()> {
        if self.n_x != n_x || self.n_y != n_y || self.values.len() != n_x * n_y {
            return Err(Error::ShapeMismatch {
                expected: format!("{n_x}x{n_y}"),
                got: format!("{}x{}", self.n_x, self.n_y),
            });
        }
        Ok(())
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.values)
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Field) -> Field {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Field { n_x: self.n_x, n_y: self.n_y, values }
    }

    pub fn add(&self, other: &Field) -> Field {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Field { n_x: self.n_x, n_y: self.n_y, values }
    }

    pub fn scale(&self, s: C64) -> Field {
        Field { n_x: self.n_x, n_y: self.n_y, values: self.values.iter().map(|v| v * s).collect() }
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n_x: usize, w: usize) -> Grid2D {
        Grid2D::new(n_x, 20, 0.01, w, YBoundary::Pml).unwrap()
    }

    #[test]
    fn beta_for_reference_layout() {
        let plan = plan_decomposition(&grid(108, 4), 10, 4).unwrap();
        assert_eq!(plan.beta, vec![4, 14, 24, 34, 44, 54, 63, 73, 83, 93, 104]);
        assert_eq!(plan.beta_tilde[0], 4);
        assert_eq!(plan.beta_tilde[10], 104);
        for j in 1..10 {
            assert_eq!(plan.beta_tilde[j], plan.beta[j] + 1);
        }
    }

    #[test]
    fn single_subdomain_covers_grid() {
        let g = grid(30, 4);
        let plan = plan_decomposition(&g, 1, 4).unwrap();
        assert_eq!(plan.beta, vec![4, 26]);
        let sd = plan.subdomain(1);
        assert_eq!((sd.first_col, sd.width, sd.left_pad, sd.right_pad), (1, 30, 0, 0));
        assert!(plan.interface_columns().is_empty());
    }

    #[test]
    fn thin_cores_rejected() {
        assert!(matches!(plan_decomposition(&grid(20, 4), 10, 4), Err(Error::InvalidPlan(_))));
        assert!(plan_decomposition(&grid(20, 4), 0, 4).is_err());
    }

    #[test]
    fn cores_partition_interior() {
        for (n_x, j_count) in [(108, 10), (57, 7), (40, 3), (208, 20)] {
            let plan = plan_decomposition(&grid(n_x, 4), j_count, 4).unwrap();
            let mut up = vec![0; n_x + 1];
            let mut down = vec![0; n_x + 1];
            for j in 1..=j_count {
                let (a, b) = plan.upward_range(j);
                (a..=b).for_each(|c| up[c] += 1);
                let (a, b) = plan.downward_range(j);
                (a..=b).for_each(|c| down[c] += 1);
            }
            assert!(up[1..].iter().all(|&n| n == 1));
            assert!(down[1..].iter().all(|&n| n == 1));
            let widths: Vec<_> = plan.subdomains.iter().map(|s| s.width).collect();
            let spread = widths.iter().max().unwrap() - widths.iter().min().unwrap();
            assert!(spread <= 2, "{widths:?}");
        }
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma_profile(1e-6, 0.04, 0.0, 1.0), 0.0);
        let s = sigma_profile(1e-6, 0.04, 1.0, 1.0);
        assert!((s - 3.0 * 1e6f64.ln() / 0.08).abs() < 1e-9);
        assert!((s - 518.1).abs() < 0.1);
        assert_eq!(sigma_profile(1.0, 0.04, 0.7, 1.0), 0.0);
        let mut last = 0.0;
        for n in 0..=20 {
            let s = sigma_profile(1e-6, 0.04, n as f64 / 20.0, 1.3);
            assert!(s >= last);
            last = s;
        }
    }

    #[test]
    fn per_point_damping() {
        let d = Damping::PerPoint(1.0);
        assert!((d.r_target(4) - (-4.0f64).exp()).abs() < 1e-15);
        // sigma_max * h / c is width independent
        let h = 0.01;
        for w in [3, 4, 6, 20] {
            let s = sigma_max(d.r_target(w), w as f64 * h, 1.0);
            assert!((s * h - 1.5).abs() < 1e-12);
        }
        assert_eq!(Damping::Reflection(1e-6).r_target(9), 1e-6);
    }

    #[test]
    fn alpha_bounded() {
        for s in [0.0, 0.1, 10.0, 1e4] {
            let a = alpha(s, 20.0);
            assert!(a.norm() <= 1.0);
        }
        assert_eq!(alpha(0.0, 3.0), C64::new(1.0, 0.0));
    }

    #[test]
    fn layer_depths() {
        let l = Layer { boundary: 4.5, width: 4, side: LayerSide::Low };
        assert_eq!(l.depth_fraction(5.0), 0.0);
        assert_eq!(l.depth_fraction(4.5), 0.0);
        assert_eq!(l.depth_fraction(4.0), 0.125);
        assert_eq!(l.depth_fraction(0.5), 1.0);
        assert_eq!(l.depth_fraction(-3.0), 1.0);
        let r = Layer { boundary: 10.5, width: 2, side: LayerSide::High };
        assert_eq!(r.depth_fraction(11.0), 0.25);
        assert_eq!(r.depth_fraction(10.0), 0.0);
    }

    #[test]
    fn extension_copies_edge_columns() {
        let g = Grid2D::new(40, 9, 0.1, 3, YBoundary::Pml).unwrap();
        // layered in y: speed depends on row only
        let c: Vec<f64> = (0..g.len()).map(|p| 1.0 + 0.1 * (p / g.n_x) as f64).collect();
        let m = Medium::new(5.0, g.n_x, g.n_y, c).unwrap();
        let plan = plan_decomposition(&g, 3, 4).unwrap();
        for j in 1..=3 {
            let sd = plan.subdomain(j);
            let ext = extend_medium(&m, &plan, j);
            for r in 0..g.n_y {
                for l in 0..sd.width {
                    let col = sd.global(l).clamp(sd.real_lo as i64, sd.real_hi as i64) as usize;
                    assert_eq!(ext[r * sd.width + l], m.speed(col - 1, r));
                }
                for l in 0..sd.left_pad {
                    assert_eq!(ext[r * sd.width + l], ext[r * sd.width + sd.left_pad]);
                }
            }
        }
        assert_eq!(plan.subdomain(1).left_pad, 0);
        let cst = Medium::constant(&g, 5.0, 2.0).unwrap();
        assert!(extend_medium(&cst, &plan, 2).iter().all(|&v| v == 2.0));
    }
}
