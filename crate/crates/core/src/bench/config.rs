//! TOML run configuration.
//!
//! ```toml
//! [grid]
//! n_core_x = 100
//! n_core_y = 100
//! h = 0.01
//! w_ext = 4
//! y_boundary = "pml"        # or "dirichlet"
//!
//! [physics]
//! frequency = 10.0          # ω / 2π
//!
//! [solver]
//! n_sub = 10
//! w_pml = 4
//! transmission = "pml"      # or "robin"
//! mode = "reduced"          # or "full"
//! tol = 1e-6
//! max_iter = 200
//! # r_target = 1e-6         # fixed reflection target; default exp(-pml_kappa * width)
//! # pml_kappa = 1.0
//! # m_overlap = 1           # Robin slab overlap
//!
//! [medium]
//! kind = "random"           # constant | random | layered | file
//! amplitude = 0.25
//! smoothing_passes = 5
//! seed = 42
//!
//! [source]
//! kind = "point"            # point | file
//! # col = 54                # 1-based node; default is the grid center
//! # row = 54
//!
//! [output]
//! # field = "u.bin"
//! ```
//!
//! Medium and source files use the field format of [`crate::bench::fieldio`];
//! a medium file stores speeds in the real parts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::fieldio::read_field;
use crate::bench::media::{
    default_source_node, generate_random_medium, layered_medium, point_source, DEFAULT_AMPLITUDE, DEFAULT_SEED,
    DEFAULT_SMOOTHING,
};
use crate::error::{Error, Result};
use crate::grid::{Damping, Field, Grid2D, Medium, PmlSpec, YBoundary};
use crate::sweep::SolveMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_core_x: usize,
    pub n_core_y: usize,
    pub h: f64,
    #[serde(default = "default_width")]
    pub w_ext: usize,
    #[serde(default = "default_y_boundary")]
    pub y_boundary: YBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    /// `ω / 2π`.
    pub frequency: f64,
}

/// Interface coupling used by the preconditioner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transmission {
    Pml,
    Robin,
}

impl Transmission {
    pub fn name(&self) -> &'static str {
        match self {
            Transmission::Pml => "pml",
            Transmission::Robin => "robin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub n_sub: usize,
    #[serde(default = "default_width")]
    pub w_pml: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_target: Option<f64>,
    #[serde(default = "default_kappa")]
    pub pml_kappa: f64,
    #[serde(default = "default_transmission")]
    pub transmission: Transmission,
    #[serde(default = "default_overlap")]
    pub m_overlap: usize,
    #[serde(default = "default_mode")]
    pub mode: SolveMode,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MediumSpec {
    Constant {
        #[serde(default = "default_speed")]
        c: f64,
    },
    Random {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_smoothing")]
        smoothing_passes: usize,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    Layered {
        speeds: Vec<f64>,
        /// 1-based rows where each new layer starts.
        interfaces: Vec<usize>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceSpec {
    Point {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        col: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        row: Option<usize>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub solver: SolverSection,
    pub medium: MediumSpec,
    #[serde(default = "default_source")]
    pub source: SourceSpec,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_width() -> usize {
    4
}
fn default_y_boundary() -> YBoundary {
    YBoundary::Pml
}
fn default_kappa() -> f64 {
    Damping::DEFAULT_KAPPA
}
fn default_transmission() -> Transmission {
    Transmission::Pml
}
fn default_overlap() -> usize {
    1
}
fn default_mode() -> SolveMode {
    SolveMode::Reduced
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    200
}
fn default_speed() -> f64 {
    1.0
}
fn default_amplitude() -> f64 {
    DEFAULT_AMPLITUDE
}
fn default_smoothing() -> usize {
    DEFAULT_SMOOTHING
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_source() -> SourceSpec {
    SourceSpec::Point { col: None, row: None }
}

/// Grid, medium, PML and right-hand side built from a config.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid2D,
    pub medium: Medium,
    pub pml: PmlSpec,
    pub source: Field,
}

impl RunConfig {
    /// A run on an `n × n` interior with `J = n / 10` and the given medium.
    pub fn square(n: usize, frequency: f64, medium: MediumSpec, transmission: Transmission) -> Self {
        Self {
            grid: GridSection {
                n_core_x: n,
                n_core_y: n,
                h: 1.0 / n as f64,
                w_ext: default_width(),
                y_boundary: YBoundary::Pml,
            },
            physics: PhysicsSection { frequency },
            solver: SolverSection {
                n_sub: (n / 10).max(1),
                w_pml: default_width(),
                r_target: None,
                pml_kappa: default_kappa(),
                transmission,
                m_overlap: default_overlap(),
                mode: default_mode(),
                tol: default_tol(),
                max_iter: default_max_iter(),
            },
            medium,
            source: default_source(),
            output: OutputSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let g = &self.grid;
        if g.n_core_x == 0 || g.n_core_y == 0 {
            return bad("interior sizes must be positive".into());
        }
        if !(g.h > 0.0 && g.h.is_finite()) {
            return bad(format!("h = {} must be positive", g.h));
        }
        if !(self.physics.frequency > 0.0 && self.physics.frequency.is_finite()) {
            return bad(format!("frequency {} must be positive", self.physics.frequency));
        }
        let s = &self.solver;
        if s.n_sub == 0 || s.max_iter == 0 {
            return bad("n_sub and max_iter must be positive".into());
        }
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return bad(format!("tol = {} must lie in (0, 1)", s.tol));
        }
        if let Some(r) = s.r_target {
            if !(r > 0.0 && r <= 1.0) {
                return bad(format!("r_target = {r} must lie in (0, 1]"));
            }
        }
        if !(s.pml_kappa >= 0.0 && s.pml_kappa.is_finite()) {
            return bad(format!("pml_kappa = {} must be nonnegative", s.pml_kappa));
        }
        match &self.medium {
            MediumSpec::Constant { c } if !(*c > 0.0 && c.is_finite()) => bad(format!("speed {c} must be positive")),
            MediumSpec::Random { amplitude, .. } if !(0.0..1.0).contains(amplitude) => {
                bad(format!("amplitude {amplitude} must lie in [0, 1)"))
            }
            MediumSpec::Layered { speeds, interfaces } if speeds.len() != interfaces.len() + 1 => {
                bad("layered medium needs one more speed than interfaces".into())
            }
            _ => Ok(()),
        }
    }

    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.physics.frequency
    }

    pub fn pml(&self) -> PmlSpec {
        let damping = match self.solver.r_target {
            Some(r) => Damping::Reflection(r),
            None => Damping::PerPoint(self.solver.pml_kappa),
        };
        PmlSpec { w_pml: self.solver.w_pml, damping }
    }

    pub fn build_grid(&self) -> Result<Grid2D> {
        let g = &self.grid;
        Grid2D::with_interior(g.n_core_x, g.n_core_y, g.h, g.w_ext, g.y_boundary)
    }

    /// Builds the grid, medium and source; errors here are config errors.
    pub fn problem(&self) -> Result<Problem> {
        self.validate()?;
        let grid = self.build_grid()?;
        let omega = self.omega();
        let medium = match &self.medium {
            MediumSpec::Constant { c } => Medium::constant(&grid, omega, *c)?,
            MediumSpec::Random { amplitude, smoothing_passes, seed } => {
                generate_random_medium(&grid, omega, *seed, *amplitude, *smoothing_passes)?
            }
            MediumSpec::Layered { speeds, interfaces } => layered_medium(&grid, omega, speeds, interfaces)?,
            MediumSpec::File { path } => {
                let (f, _) = read_field(path)?;
                f.check_shape(grid.n_x, grid.n_y)?;
                Medium::new(omega, grid.n_x, grid.n_y, f.values.iter().map(|v| v.re).collect())?
            }
        };
        let source = match &self.source {
            SourceSpec::Point { col, row } => {
                let (dc, dr) = default_source_node(&grid);
                point_source(&grid, col.unwrap_or(dc), row.unwrap_or(dr))?
            }
            SourceSpec::File { path } => {
                let (f, _) = read_field(path)?;
                f.check_shape(grid.n_x, grid.n_y)?;
                f
            }
        };
        Ok(Problem { grid, medium, pml: self.pml(), source })
    }
}
