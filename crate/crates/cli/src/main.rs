//! `symred`: batch front end for synthesis, symmetry checks, reductions,
//! finite-difference verification and vertical modes.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails, 2 on
//! malformed input or I/O errors.

mod commands;
mod files;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use symred::report::Status;
use symred::sampling::Sampling;
use symred::synth::CheckContext;

use commands::{Outcome, SolutionArg, SolveArgs};
use files::Inputs;
use report::{RunReport, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "symred", version, about = "Symmetry, reduction and residual checks for u_t = A u_xx + B u_x + C u")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Offset into the quasi-random sampling sequence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Points per sampling pass.
    #[arg(long, global = true, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_sym: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_sol: f64,
    /// Directory for report.json and data files; without it the report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record wall time in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a family's coefficients from a family JSON file (needs --out).
    Synth { family: PathBuf },
    /// Determining residuals of a generator and/or the residual of a candidate solution.
    Check {
        pde: PathBuf,
        #[arg(long)]
        gen: Option<PathBuf>,
        /// Closed-form solution in x and t.
        #[arg(long, conflicts_with = "solution_file")]
        solution: Option<String>,
        #[arg(long)]
        solution_file: Option<PathBuf>,
    },
    /// Similarity reduction with a separable ansatz.
    Reduce { pde: PathBuf, ansatz: PathBuf },
    /// Explicit finite differences against a closed-form solution.
    Solve {
        pde: PathBuf,
        /// Closed form in x and t; supplies the initial values and, by default, the boundary values.
        #[arg(long)]
        ic: String,
        #[arg(long)]
        bc: Option<String>,
        #[arg(long, default_value_t = 41)]
        nx: usize,
        /// Time steps; defaults to a stable step size.
        #[arg(long)]
        nt: Option<usize>,
        /// Grid levels for a convergence study (0 for none, otherwise at least 3).
        #[arg(long, default_value_t = 0)]
        levels: usize,
        /// Accepted range of observed orders, e.g. `--order 1.7 2.3`.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        order: Option<Vec<f64>>,
        /// Fail if the final-time error exceeds this.
        #[arg(long)]
        max_error: Option<f64>,
    },
    /// Vertical modes of a buoyancy profile JSON file.
    Modes {
        profile: PathBuf,
        #[arg(long, default_value_t = 5)]
        modes: usize,
    },
}

fn run_command(cli: &Cli, ctx: &CheckContext, inputs: &mut Inputs) -> Result<Outcome> {
    match &cli.command {
        Command::Synth { family } => {
            if cli.global.out.is_none() {
                bail!("synth writes several files and needs --out <dir>");
            }
            commands::synth(ctx, inputs, family)
        }
        Command::Check { pde, gen, solution, solution_file } => {
            let sol = match (solution, solution_file) {
                (Some(s), _) => Some(SolutionArg::Expr(s.clone())),
                (None, Some(p)) => Some(SolutionArg::File(p.clone())),
                (None, None) => None,
            };
            commands::check(ctx, inputs, pde, gen.as_deref(), sol)
        }
        Command::Reduce { pde, ansatz } => commands::reduce(ctx, inputs, pde, ansatz),
        Command::Solve { pde, ic, bc, nx, nt, levels, order, max_error } => {
            let args = SolveArgs {
                ic: ic.clone(),
                bc: bc.clone(),
                nx: *nx,
                nt: *nt,
                levels: *levels,
                order: order.as_ref().map(|o| [o[0], o[1]]),
                max_error: *max_error,
            };
            commands::solve(ctx, inputs, pde, &args)
        }
        Command::Modes { profile, modes } => commands::modes(inputs, profile, *modes),
    }
}

fn emit(cli: &Cli, report: &RunReport, outcome: &Outcome) -> Result<()> {
    let json = files::to_json(report);
    match &cli.global.out {
        Some(dir) => {
            commands::prepare_out(dir)?;
            for (name, contents) in &outcome.files {
                files::write(dir, name, contents)?;
            }
            if cli.global.format == Format::Csv {
                let (name, contents) = outcome.csv_or_checks();
                files::write(dir, &name, &contents)?;
            }
            files::write(dir, "report.json", &json)?;
            summarize(report, Some(dir));
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match cli.global.format {
                Format::Json => stdout.write_all(json.as_bytes())?,
                Format::Csv => {
                    stdout.write_all(outcome.csv_or_checks().1.as_bytes())?;
                    summarize(report, None);
                }
            }
        }
    }
    Ok(())
}

fn summarize(report: &RunReport, dir: Option<&Path>) {
    for c in &report.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        eprintln!("{status} {}: {:e} (tolerance {:e})", c.name, c.max_scaled, c.tolerance);
    }
    if let Some(d) = dir {
        eprintln!("wrote {}", d.join("report.json").display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let ctx = CheckContext {
        sampling: Sampling {
            samples: cli.global.samples as usize,
            seed: cli.global.seed,
        },
        tol_sym: cli.global.tol_sym,
        tol_sol: cli.global.tol_sol,
    };
    let mut inputs = Inputs::default();
    let outcome = match run_command(&cli, &ctx, &mut inputs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let ok = outcome.checks.iter().all(|c| c.passed());
    let report = RunReport {
        command: std::env::args().skip(1).collect(),
        settings: Settings {
            seed: cli.global.seed,
            samples: ctx.sampling.samples,
            tol_sym: ctx.tol_sym,
            tol_sol: ctx.tol_sol,
        },
        inputs: inputs.0,
        status: Status::from_bool(ok),
        checks: outcome.checks.clone(),
        payload: outcome.payload.clone(),
        wall_time_s: cli.global.timing.then(|| start.elapsed().as_secs_f64()),
    };
    if let Err(e) = emit(&cli, &report, &outcome) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
