//! Five-point Helmholtz operator with PML coordinate stretching.
//!
//! In a layer the x part of the Laplacian becomes
//! `α(x_i) [α(x_{i+1/2})(u_{i+1}-u_i) - α(x_{i-1/2})(u_i-u_{i-1})] / h²`
//! with `α = 1/(1 + iσ/ω)`, and likewise in y. Half-point damping is
//! evaluated from the continuous profile at the half-point depth. Neighbors
//! outside the grid are homogeneous Dirichlet ghosts unless the side carries
//! a Robin row.

use crate::direct::BlockTridiagonalMatrix;
use crate::error::{Error, Result};
use crate::grid::{
    alpha, extend_medium, sigma_profile, Damping, DecompositionPlan, Field, Grid2D, Layer, LayerSide, Medium, PmlSpec,
    SubdomainGrid, YBoundary,
};
use crate::C64;

/// Treatment of an x end of a stencil grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XBoundary {
    Dirichlet,
    /// Impedance row `±∂x u + ik u` at the outer half point.
    Robin,
}

/// A PML layer together with the local index whose speed sets its strength.
#[derive(Debug, Clone)]
pub struct PmlLayer {
    pub layer: Layer,
    /// Local column (x layers) or row (y layers) supplying `c_ref`.
    pub ref_index: usize,
}

/// Everything needed to build a [`Stencil`] on a rectangular patch.
#[derive(Debug, Clone)]
pub struct StencilGeometry<'a> {
    /// Global column number of local column 0.
    pub first_col: i64,
    pub width: usize,
    pub n_y: usize,
    pub h: f64,
    pub omega: f64,
    pub damping: Damping,
    /// Local speeds, x fastest.
    pub speeds: &'a [f64],
    pub x_layers: Vec<PmlLayer>,
    pub y_layers: Vec<PmlLayer>,
    pub left: XBoundary,
    pub right: XBoundary,
}

/// Node-wise stencil coefficients on a patch.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub n_x: usize,
    pub n_y: usize,
    pub h: f64,
    /// α_x at nodes.
    pub ax: Vec<C64>,
    /// α_x at half points, `(n_x + 1)` per row; entry `i` sits left of column `i`.
    pub axh: Vec<C64>,
    pub ay: Vec<C64>,
    /// α_y at half points, `n_x` per half-row; half-row `r` sits below row `r`.
    pub ayh: Vec<C64>,
    pub k2: Vec<f64>,
    /// Extra diagonal terms (Robin rows).
    pub extra: Vec<C64>,
}

/// Stencil weights of one node: west, east, south, north, center.
#[derive(Debug, Clone, Copy)]
pub struct NodeWeights {
    pub west: C64,
    pub east: C64,
    pub south: C64,
    pub north: C64,
    pub center: C64,
}

fn layer_sigma(layers: &[PmlLayer], pos: f64, h: f64, damping: Damping, cref: impl Fn(usize) -> f64) -> f64 {
    layers
        .iter()
        .map(|pl| {
            let xi = pl.layer.depth_fraction(pos);
            if xi == 0.0 {
                0.0
            } else {
                let w = pl.layer.width;
                sigma_profile(damping.r_target(w), w as f64 * h, xi, cref(pl.ref_index))
            }
        })
        .sum()
}

impl Stencil {
    pub fn build(g: &StencilGeometry<'_>) -> Result<Self> {
        let (nx, ny) = (g.width, g.n_y);
        if g.speeds.len() != nx * ny {
            return Err(Error::ShapeMismatch {
                expected: format!("{nx}x{ny} speeds"),
                got: format!("{}", g.speeds.len()),
            });
        }
        let sp = |i: usize, r: usize| g.speeds[r * nx + i];
        let mut ax = vec![C64::new(1.0, 0.0); nx * ny];
        let mut axh = vec![C64::new(1.0, 0.0); (nx + 1) * ny];
        let mut ay = vec![C64::new(1.0, 0.0); nx * ny];
        let mut ayh = vec![C64::new(1.0, 0.0); nx * (ny + 1)];
        let mut k2 = vec![0.0; nx * ny];
        let mut extra = vec![C64::new(0.0, 0.0); nx * ny];

        for r in 0..ny {
            for i in 0..=nx {
                let pos = g.first_col as f64 + i as f64 - 0.5;
                let s = layer_sigma(&g.x_layers, pos, g.h, g.damping, |c| sp(c, r));
                axh[r * (nx + 1) + i] = alpha(s, g.omega);
            }
            for i in 0..nx {
                let pos = (g.first_col + i as i64) as f64;
                let s = layer_sigma(&g.x_layers, pos, g.h, g.damping, |c| sp(c, r));
                ax[r * nx + i] = alpha(s, g.omega);
                let k = g.omega / sp(i, r);
                k2[r * nx + i] = k * k;
            }
        }
        for i in 0..nx {
            for r in 0..=ny {
                let s = layer_sigma(&g.y_layers, r as f64 + 0.5, g.h, g.damping, |q| sp(i, q));
                ayh[r * nx + i] = alpha(s, g.omega);
            }
            for r in 0..ny {
                let s = layer_sigma(&g.y_layers, (r + 1) as f64, g.h, g.damping, |q| sp(i, q));
                ay[r * nx + i] = alpha(s, g.omega);
            }
        }

        let robin_diag = |k: f64| {
            let c0 = C64::new(1.0, -k * g.h / 2.0);
            -C64::new(0.0, k) / (c0 * g.h)
        };
        for (side, col, half) in [(g.left, 0usize, 0usize), (g.right, nx - 1, nx)] {
            if side == XBoundary::Robin {
                for r in 0..ny {
                    axh[r * (nx + 1) + half] = C64::new(0.0, 0.0);
                    extra[r * nx + col] += robin_diag(g.omega / sp(col, r));
                }
            }
        }
        Ok(Self { n_x: nx, n_y: ny, h: g.h, ax, axh, ay, ayh, k2, extra })
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weights of node `(i, r)`; neighbors outside the patch have weight
    /// reported but must be dropped by the caller.
    #[inline]
    pub fn weights(&self, i: usize, r: usize) -> NodeWeights {
        let nx = self.n_x;
        let h2 = self.h * self.h;
        let p = r * nx + i;
        let ax = self.ax[p];
        let ay = self.ay[p];
        let west = -ax * self.axh[r * (nx + 1) + i] / h2;
        let east = -ax * self.axh[r * (nx + 1) + i + 1] / h2;
        let south = -ay * self.ayh[r * nx + i] / h2;
        let north = -ay * self.ayh[(r + 1) * nx + i] / h2;
        let center = -(west + east + south + north) - self.k2[p] + self.extra[p];
        NodeWeights { west, east, south, north, center }
    }

    /// Applies the operator to a local vector (x fastest).
    pub fn apply(&self, u: &[C64]) -> Result<Vec<C64>> {
        if u.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.n_x, self.n_y),
                got: format!("{} values", u.len()),
            });
        }
        let (nx, ny) = (self.n_x, self.n_y);
        let mut out = vec![C64::new(0.0, 0.0); nx * ny];
        for r in 0..ny {
            for i in 0..nx {
                let w = self.weights(i, r);
                let p = r * nx + i;
                let mut acc = w.center * u[p];
                if i > 0 {
                    acc += w.west * u[p - 1];
                }
                if i + 1 < nx {
                    acc += w.east * u[p + 1];
                }
                if r > 0 {
                    acc += w.south * u[p - nx];
                }
                if r + 1 < ny {
                    acc += w.north * u[p + nx];
                }
                out[p] = acc;
            }
        }
        Ok(out)
    }

    /// Block-tridiagonal form with one block per row (x fastest within a block).
    pub fn to_block_tridiagonal(&self) -> BlockTridiagonalMatrix {
        let (m, nb) = (self.n_x, self.n_y);
        let zero = C64::new(0.0, 0.0);
        let mut diag = Vec::with_capacity(nb);
        let mut lower = Vec::with_capacity(nb);
        let mut upper = Vec::with_capacity(nb);
        for r in 0..nb {
            let mut d = vec![zero; m * m];
            let mut lo = vec![zero; m * m];
            let mut up = vec![zero; m * m];
            for i in 0..m {
                let w = self.weights(i, r);
                d[i * m + i] = w.center;
                if i > 0 {
                    d[i * m + i - 1] = w.west;
                }
                if i + 1 < m {
                    d[i * m + i + 1] = w.east;
                }
                lo[i * m + i] = w.south;
                up[i * m + i] = w.north;
            }
            diag.push(d);
            lower.push(lo);
            upper.push(up);
        }
        // first lower / last upper blocks couple to ghosts and stay unused
        lower[0].iter_mut().for_each(|v| *v = zero);
        upper[nb - 1].iter_mut().for_each(|v| *v = zero);
        BlockTridiagonalMatrix::new(m, diag, lower, upper).expect("consistent block sizes")
    }
}

fn y_layers(grid: &Grid2D) -> Vec<PmlLayer> {
    match grid.y_boundary {
        YBoundary::Dirichlet => Vec::new(),
        YBoundary::Pml => {
            let w = grid.w_ext;
            vec![
                PmlLayer { layer: Layer { boundary: w as f64 + 0.5, width: w, side: LayerSide::Low }, ref_index: w },
                PmlLayer {
                    layer: Layer { boundary: (grid.n_y - w) as f64 + 0.5, width: w, side: LayerSide::High },
                    ref_index: grid.n_y - w - 1,
                },
            ]
        }
    }
}

fn exterior_low(grid: &Grid2D, first_col: i64) -> PmlLayer {
    let w = grid.w_ext;
    PmlLayer {
        layer: Layer { boundary: w as f64 + 0.5, width: w, side: LayerSide::Low },
        ref_index: (w as i64 + 1 - first_col) as usize,
    }
}

fn exterior_high(grid: &Grid2D, first_col: i64) -> PmlLayer {
    let w = grid.w_ext;
    let b = grid.n_x - w;
    PmlLayer {
        layer: Layer { boundary: b as f64 + 0.5, width: w, side: LayerSide::High },
        ref_index: (b as i64 - first_col) as usize,
    }
}

/// The global operator `A` on the full grid.
#[derive(Debug, Clone)]
pub struct GlobalOperator {
    pub grid: Grid2D,
    pub stencil: Stencil,
}

impl GlobalOperator {
    pub fn new(grid: &Grid2D, medium: &Medium, pml: &PmlSpec) -> Result<Self> {
        if medium.n_x != grid.n_x || medium.n_y != grid.n_y {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", grid.n_x, grid.n_y),
                got: format!("{}x{}", medium.n_x, medium.n_y),
            });
        }
        let geom = StencilGeometry {
            first_col: 1,
            width: grid.n_x,
            n_y: grid.n_y,
            h: grid.h,
            omega: medium.omega,
            damping: pml.damping,
            speeds: &medium.c,
            x_layers: vec![exterior_low(grid, 1), exterior_high(grid, 1)],
            y_layers: y_layers(grid),
            left: XBoundary::Dirichlet,
            right: XBoundary::Dirichlet,
        };
        Ok(Self { grid: grid.clone(), stencil: Stencil::build(&geom)? })
    }

    /// `A u` on the full grid.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        u.check_shape(self.grid.n_x, self.grid.n_y)?;
        let values = self.stencil.apply(&u.values)?;
        Field::from_values(u.n_x, u.n_y, values)
    }

    /// `f - A u`.
    pub fn residual(&self, f: &Field, u: &Field) -> Result<Field> {
        Ok(f.sub(&self.apply(u)?))
    }
}

/// Free-function form of [`GlobalOperator::apply`].
pub fn apply_global(op: &GlobalOperator, u: &Field) -> Result<Field> {
    op.apply(u)
}

/// Subdomain operator `A^(j)` on its padded grid.
#[derive(Debug, Clone)]
pub struct SubdomainOperator {
    pub index: usize,
    pub grid: SubdomainGrid,
    pub stencil: Stencil,
}

/// Assembles `A^(j)` with interior PML pads and the x-independent
/// extension of the medium into them.
pub fn assemble_subdomain(
    j: usize,
    plan: &DecompositionPlan,
    grid: &Grid2D,
    medium: &Medium,
    pml: &PmlSpec,
) -> Result<SubdomainOperator> {
    if j == 0 || j > plan.n_sub {
        return Err(Error::InvalidArgument(format!("subdomain index {j} out of 1..={}", plan.n_sub)));
    }
    let sd = plan.subdomain(j).clone();
    let speeds = extend_medium(medium, plan, j);
    let mut x_layers = Vec::new();
    if j == 1 {
        x_layers.push(exterior_low(grid, sd.first_col));
    } else {
        x_layers.push(PmlLayer {
            layer: Layer { boundary: plan.beta[j - 1] as f64 + 0.5, width: plan.w_pml, side: LayerSide::Low },
            ref_index: sd.left_pad,
        });
    }
    if j == plan.n_sub {
        x_layers.push(exterior_high(grid, sd.first_col));
    } else {
        x_layers.push(PmlLayer {
            layer: Layer { boundary: plan.beta_tilde[j] as f64 + 0.5, width: plan.w_pml, side: LayerSide::High },
            ref_index: sd.local(sd.core_hi as i64).expect("core inside grid"),
        });
    }
    let geom = StencilGeometry {
        first_col: sd.first_col,
        width: sd.width,
        n_y: grid.n_y,
        h: grid.h,
        omega: medium.omega,
        damping: pml.damping,
        speeds: &speeds,
        x_layers,
        y_layers: y_layers(grid),
        left: XBoundary::Dirichlet,
        right: XBoundary::Dirichlet,
    };
    Ok(SubdomainOperator { index: j, grid: sd, stencil: Stencil::build(&geom)? })
}

/// Stencil for a plain slab of real columns `lo..=hi` with optional Robin
/// ends, exterior PML kept where the slab touches the grid boundary.
pub fn assemble_slab(
    grid: &Grid2D,
    medium: &Medium,
    pml: &PmlSpec,
    lo: usize,
    hi: usize,
    left: XBoundary,
    right: XBoundary,
) -> Result<Stencil> {
    let width = hi - lo + 1;
    let mut speeds = Vec::with_capacity(width * grid.n_y);
    for r in 0..grid.n_y {
        speeds.extend((lo..=hi).map(|c| medium.speed(c - 1, r)));
    }
    let first = lo as i64;
    let mut x_layers = Vec::new();
    if lo <= grid.w_ext {
        x_layers.push(exterior_low(grid, first));
    }
    if hi > grid.n_x - grid.w_ext {
        x_layers.push(exterior_high(grid, first));
    }
    let geom = StencilGeometry {
        first_col: first,
        width,
        n_y: grid.n_y,
        h: grid.h,
        omega: medium.omega,
        damping: pml.damping,
        speeds: &speeds,
        x_layers,
        y_layers: y_layers(grid),
        left,
        right,
    };
    Stencil::build(&geom)
}

/// Which partition a restriction uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Cores `β_{j-1}+1 ..= β_j`.
    Upward,
    /// Cores `β̃_{j-1}+1 ..= β̃_j`.
    Downward,
}

/// Copies `f` onto subdomain `j`'s grid on the owned core columns, zero
/// elsewhere (pads included).
pub fn restrict_rhs(f: &Field, plan: &DecompositionPlan, j: usize, which: Sweep) -> Vec<C64> {
    let sd = plan.subdomain(j);
    let (lo, hi) = match which {
        Sweep::Upward => plan.upward_range(j),
        Sweep::Downward => plan.downward_range(j),
    };
    let mut out = vec![C64::new(0.0, 0.0); sd.width * f.n_y];
    for r in 0..f.n_y {
        for c in lo..=hi {
            let l = sd.local(c as i64).expect("owned column inside subdomain grid");
            out[r * sd.width + l] = f.get(c - 1, r);
        }
    }
    out
}

/// Single-layer source `s δ_h(x - x_{β+1/2}) ∂x^h u` on columns `β`, `β+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSource {
    /// Left column `β` of the pair (global, 1-based).
    pub col: usize,
    /// Value placed on both columns, per row.
    pub values: Vec<C64>,
}

impl TransmissionSource {
    /// Adds the source to a local right-hand side on `sd`.
    pub fn add_to(&self, sd: &SubdomainGrid, rhs: &mut [C64]) {
        let n_y = self.values.len();
        for c in [self.col as i64, self.col as i64 + 1] {
            if let Some(l) = sd.local(c) {
                for r in 0..n_y {
                    rhs[r * sd.width + l] += self.values[r];
                }
            }
        }
    }
}

/// Builds the interface source from a neighbor's local solution.
///
/// `sign` is `-2` for the upward sweep and `+2` for the downward sweep.
pub fn transmission_source(
    neighbor: &[C64],
    sd: &SubdomainGrid,
    n_y: usize,
    h: f64,
    beta: usize,
    sign: f64,
) -> Result<TransmissionSource> {
    let (a, b) = match (sd.local(beta as i64), sd.local(beta as i64 + 1)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidArgument(format!("neighbor grid lacks columns {beta} and {}", beta + 1))),
    };
    if neighbor.len() != sd.width * n_y {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{n_y}", sd.width),
            got: format!("{} values", neighbor.len()),
        });
    }
    let scale = sign / (2.0 * h * h);
    let values = (0..n_y).map(|r| (neighbor[r * sd.width + b] - neighbor[r * sd.width + a]) * scale).collect();
    Ok(TransmissionSource { col: beta, values })
}
