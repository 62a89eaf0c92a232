//! Double-sweep domain decomposition for the 2-D heterogeneous Helmholtz
//! equation, using PML-padded thin subdomains as transmission conditions.
//!
//! The crate is organized bottom-up:
//!
//! - [`grid`]: grid geometry, medium, PML profiles and the subdomain plan.
//! - [`discretize`]: the 5-point operator with PML stretching, global and
//!   per-subdomain, plus right-hand-side restriction and interface sources.
//! - [`direct`]: block-tridiagonal LU used for every subdomain solve.
//! - [`krylov`]: full GMRES over complex vectors.
//! - [`sweep`]: the double-sweep preconditioner, interface reduction and the
//!   top-level solver.
//! - [`baselines`]: Robin-transmission double sweep, 1-D semi-analytic
//!   sweeps and an exact separable solver for the Dirichlet strip.
//! - [`bench`]: run configuration, media/source generators, benchmark
//!   tables and field serialization.

pub mod baselines;
pub mod bench;
pub mod direct;
pub mod discretize;
pub mod error;
pub mod grid;
pub mod krylov;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex scalar used throughout.
pub type C64 = Complex64;
