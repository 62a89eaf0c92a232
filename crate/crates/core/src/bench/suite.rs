//! Benchmark runs and CSV tables.

use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::robin::{RobinConfig, RobinContext};
use crate::bench::config::{MediumSpec, RunConfig, Transmission};
use crate::bench::media::{DEFAULT_AMPLITUDE, DEFAULT_SEED, DEFAULT_SMOOTHING};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::sweep::{SolveStats, SweepContext};

/// Column names of the benchmark CSV, in order.
pub const CSV_HEADER: [&str; 13] = [
    "medium",
    "n_x",
    "n_y",
    "h",
    "frequency",
    "n_sub",
    "w_pml",
    "method",
    "iterations",
    "converged",
    "true_residual",
    "wall_seconds",
    "error",
];

/// One row of a benchmark table; `n_x`, `n_y` are interior sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub medium: String,
    pub n_x: usize,
    pub n_y: usize,
    pub h: f64,
    pub frequency: f64,
    pub n_sub: usize,
    pub w_pml: usize,
    pub method: String,
    pub iterations: usize,
    pub converged: bool,
    pub true_residual: f64,
    pub wall_seconds: f64,
    /// Empty unless the run failed.
    pub error: String,
}

/// A labelled configuration in a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchCase {
    pub medium: String,
    pub config: RunConfig,
}

/// Result of one configured solve.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub field: Field,
    pub stats: SolveStats,
    /// Setup (assembly and factorization) plus solve.
    pub wall_seconds: f64,
}

/// Builds the problem, factors the subdomains and solves.
pub fn run_config(cfg: &RunConfig) -> Result<RunOutcome> {
    let p = cfg.problem()?;
    let s = &cfg.solver;
    let start = Instant::now();
    let (field, stats) = match s.transmission {
        Transmission::Pml => {
            let ctx = SweepContext::new(&p.grid, &p.medium, &p.pml, s.n_sub)?;
            ctx.solve(&p.source, s.tol, s.max_iter, s.mode)?
        }
        Transmission::Robin => {
            let rc = RobinConfig { m_overlap: s.m_overlap };
            let ctx = RobinContext::new(&p.grid, &p.medium, &p.pml, s.n_sub, rc)?;
            ctx.solve(&p.source, s.tol, s.max_iter)?
        }
    };
    Ok(RunOutcome { field, stats, wall_seconds: start.elapsed().as_secs_f64() })
}

fn row_for(case: &BenchCase, outcome: Result<RunOutcome>) -> BenchRow {
    let c = &case.config;
    let mut row = BenchRow {
        medium: case.medium.clone(),
        n_x: c.grid.n_core_x,
        n_y: c.grid.n_core_y,
        h: c.grid.h,
        frequency: c.physics.frequency,
        n_sub: c.solver.n_sub,
        w_pml: c.solver.w_pml,
        method: c.solver.transmission.name().to_string(),
        iterations: 0,
        converged: false,
        true_residual: f64::NAN,
        wall_seconds: 0.0,
        error: String::new(),
    };
    match outcome {
        Ok(o) => {
            row.iterations = o.stats.iterations;
            row.converged = o.stats.converged;
            row.true_residual = o.stats.true_residual;
            row.wall_seconds = o.wall_seconds;
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

/// Runs every case in order; a failing case is recorded in its row.
pub fn run_bench(suite: &[BenchCase]) -> Vec<BenchRow> {
    run_bench_with(suite, |_| {})
}

/// Like [`run_bench`], calling `progress` after each row.
pub fn run_bench_with(suite: &[BenchCase], mut progress: impl FnMut(&BenchRow)) -> Vec<BenchRow> {
    suite
        .iter()
        .map(|case| {
            let row = row_for(case, run_config(&case.config));
            progress(&row);
            row
        })
        .collect()
}

/// Random-medium frequencies `ω/2π` paired with interior sizes.
const RANDOM_FREQUENCIES: [(usize, f64); 5] = [(100, 7.14), (200, 14.29), (400, 28.57), (800, 57.14), (1600, 114.3)];

/// Constant (c = 1, ten points per wavelength) and random media at
/// interior sizes 100, 200, 400 (plus 800 and 1600 when `large`), with
/// `J = n / 10`, `w_pml = 4`, for both transmission methods.
pub fn reference_tables(large: bool) -> Vec<BenchCase> {
    let sizes: &[usize] = if large { &[100, 200, 400, 800, 1600] } else { &[100, 200, 400] };
    let mut cases = Vec::new();
    for &n in sizes {
        for t in [Transmission::Pml, Transmission::Robin] {
            let cfg = RunConfig::square(n, n as f64 / 10.0, MediumSpec::Constant { c: 1.0 }, t);
            cases.push(BenchCase { medium: "constant".into(), config: cfg });
        }
    }
    for &n in sizes {
        let freq = RANDOM_FREQUENCIES.iter().find(|(m, _)| *m == n).map(|p| p.1).expect("size listed");
        let medium = MediumSpec::Random {
            amplitude: DEFAULT_AMPLITUDE,
            smoothing_passes: DEFAULT_SMOOTHING,
            seed: DEFAULT_SEED,
        };
        for t in [Transmission::Pml, Transmission::Robin] {
            cases.push(BenchCase { medium: "random".into(), config: RunConfig::square(n, freq, medium.clone(), t) });
        }
    }
    cases
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> =
        r.headers().map_err(|e| Error::InvalidArgument(e.to_string()))?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidArgument(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(|e| Error::InvalidArgument(e.to_string()))).collect()
}
