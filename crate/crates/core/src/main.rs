use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use helmsweep::baselines::checks::{oned_checks, strip_checks, CheckResult};
use helmsweep::bench::config::RunConfig;
use helmsweep::bench::fieldio::write_field;
use helmsweep::bench::suite::{reference_tables, run_bench_with, run_config, write_csv};
use helmsweep::sweep::SolveMode;
use helmsweep::Error;

const EXIT_NONCONVERGED: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "helmsweep", version, about = "Sweeping-preconditioned 2-D Helmholtz solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configured problem.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Write the solution here (overrides the config).
        #[arg(long)]
        out_field: Option<PathBuf>,
        /// Override the GMRES space.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Run a benchmark preset and write a CSV table.
    Bench {
        #[arg(long, value_enum)]
        preset: Preset,
        /// Add the 800² and 1600² sizes.
        #[arg(long)]
        large: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the solver against the exact oracles.
    Oracle {
        #[arg(long = "case", value_enum)]
        case: OracleCase,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Reduced,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    #[value(name = "paper-tables")]
    ReferenceTables,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleCase {
    Strip,
    #[value(name = "1d")]
    OneD,
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidGrid(_)
            | Error::InvalidMedium(_)
            | Error::InvalidPlan(_)
            | Error::InvalidArgument(_)
            | Error::ShapeMismatch { .. }
            | Error::FieldFormat(_)
    )
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if is_input_error(e) { EXIT_INVALID } else { EXIT_NONCONVERGED })
}

fn solve(config: PathBuf, out_field: Option<PathBuf>, mode: Option<ModeArg>) -> ExitCode {
    let mut cfg = match RunConfig::load(&config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(m) = mode {
        cfg.solver.mode = match m {
            ModeArg::Reduced => SolveMode::Reduced,
            ModeArg::Full => SolveMode::Full,
        };
    }
    let outcome = match run_config(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let s = &outcome.stats;
    println!(
        "method={} iterations={} converged={} true_residual={:.3e} wall_seconds={:.3}",
        cfg.solver.transmission.name(),
        s.iterations,
        s.converged,
        s.true_residual,
        outcome.wall_seconds
    );
    if let Some(path) = out_field.or(cfg.output.field.clone()) {
        if let Err(e) = write_field(&outcome.field, cfg.grid.h, &path) {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    if s.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NONCONVERGED)
    }
}

fn bench(large: bool, out: PathBuf) -> ExitCode {
    let cases = reference_tables(large);
    let rows = run_bench_with(&cases, |r| {
        eprintln!(
            "{:>8} {:>5}x{:<5} J={:<4} {:>5}: iterations={:<4} residual={:.2e} time={:.2}s {}",
            r.medium, r.n_x, r.n_y, r.n_sub, r.method, r.iterations, r.true_residual, r.wall_seconds, r.error
        );
    });
    let file = match std::fs::File::create(&out) {
        Ok(f) => f,
        Err(e) => return fail(&Error::Io(e)),
    };
    if let Err(e) = write_csv(&rows, file) {
        return fail(&e);
    }
    if rows.iter().all(|r| r.converged) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NONCONVERGED)
    }
}

fn oracle(case: OracleCase) -> ExitCode {
    let results: Vec<CheckResult> = match match case {
        OracleCase::Strip => strip_checks(),
        OracleCase::OneD => oned_checks(),
    } {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    for r in &results {
        println!("{} {} ({})", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INVALID) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Solve { config, out_field, mode } => solve(config, out_field, mode),
        Command::Bench { preset: Preset::ReferenceTables, large, out } => bench(large, out),
        Command::Oracle { case } => oracle(case),
    }
}
