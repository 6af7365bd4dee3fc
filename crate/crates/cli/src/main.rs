//! Command-line front end: single runs, temporal and spatial convergence
//! sweeps, and the verification suites.
//!
//! Exit codes: 0 success, 1 solver failure (or failed verification), 2 usage
//! error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use l1fem_core::analysis::records_to_csv;
use l1fem_core::experiment::{default_coupling_factor, run, solution_csv, sweep_space, sweep_time, SpaceCoupling};
use l1fem_core::verify;
use l1fem_core::{Error, Example, ForcingMode, Grading, NewtonConfig, RunConfig};
use log::info;

#[derive(Parser)]
#[command(name = "l1fem", version, about = "L1 / P1-FEM solver for subdiffusion with nonlocal diffusion")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration, write solution.csv and print the error summary.
    Run(RunArgs),
    /// Temporal convergence sweep over a list of N.
    SweepTime(SweepTimeArgs),
    /// Spatial convergence sweep over a list of Ms.
    SweepSpace(SweepSpaceArgs),
    /// Run the property suites; nonzero exit on any failure.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Example: 1, 2, 3 (manufactured) or `zero` (homogeneous problem).
    #[arg(long, default_value = "1")]
    example: Example,

    /// Fractional order, 0 < alpha < 1.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    /// Time grading: `uniform`, `optimal` ((2-alpha)/alpha) or a number r >= 1.
    #[arg(long, default_value = "optimal")]
    grading: Grading,

    /// Forcing mode: `pure` or `reactive`.
    #[arg(long, default_value = "pure")]
    forcing: ForcingMode,

    /// Newton stopping tolerance.
    #[arg(long, default_value_t = 1e-12)]
    newton_tol: f64,

    /// Maximum Newton iterations per time level.
    #[arg(long, default_value_t = 25)]
    max_newton: usize,
}

impl Common {
    fn config(&self, n_steps: usize, cells: usize) -> RunConfig {
        let mut c = RunConfig::new(self.example, self.alpha, self.grading, n_steps, cells);
        c.forcing = self.forcing;
        c.newton = NewtonConfig {
            tol: self.newton_tol,
            max_iter: self.max_newton,
        };
        c
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,

    /// Number of time steps N.
    #[arg(long, default_value_t = 64)]
    steps: usize,

    /// Cells per side Ms.
    #[arg(long, default_value_t = 64)]
    cells: usize,

    /// Path of the nodal solution dump.
    #[arg(long, default_value = "solution.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct SweepTimeArgs {
    #[command(flatten)]
    common: Common,

    /// Increasing list of N, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    steps: Vec<usize>,

    /// Cells per side when space is not coupled.
    #[arg(long, default_value_t = 512)]
    cells: usize,

    /// Couple space to time: Ms = factor * floor(N^((2-alpha)/2)).
    #[arg(long)]
    couple_space: bool,

    /// Coupling factor (default 2 for alpha = 0.7, else 1).
    #[arg(long, requires = "couple_space")]
    couple_factor: Option<usize>,

    /// Sweep points solved concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// CSV destination (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepSpaceArgs {
    #[command(flatten)]
    common: Common,

    /// Increasing list of Ms, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    cells: Vec<usize>,

    /// Time steps when time is not coupled.
    #[arg(long, default_value_t = 2048)]
    steps: usize,

    /// Couple time to space: N = floor(Ms^(2/(2-alpha))).
    #[arg(long)]
    couple_time: bool,

    #[arg(long, default_value_t = 1)]
    jobs: usize,

    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Report destination (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Error> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn check_list(values: &[usize], what: &str) -> Result<(), Error> {
    if values.len() < 2 || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("{what} needs at least two strictly increasing values")));
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<bool, Error> {
    let config = args.common.config(args.steps, args.cells);
    let outcome = run(&config)?;
    fs::write(&args.output, solution_csv(&outcome)?)?;
    info!("wrote {}", args.output.display());
    println!("{}", outcome.summary());
    Ok(true)
}

fn cmd_sweep_time(args: &SweepTimeArgs) -> Result<bool, Error> {
    check_list(&args.steps, "--steps")?;
    let base = args.common.config(args.steps[0], args.cells);
    base.validate()?;
    let coupling = if args.couple_space {
        SpaceCoupling::Coupled {
            factor: args.couple_factor.unwrap_or_else(|| default_coupling_factor(args.common.alpha)),
        }
    } else {
        SpaceCoupling::Fixed
    };
    let sweep = sweep_time(&base, &args.steps, coupling, args.jobs)?;
    emit(&records_to_csv(&sweep.records), args.output.as_ref())?;
    Ok(true)
}

fn cmd_sweep_space(args: &SweepSpaceArgs) -> Result<bool, Error> {
    check_list(&args.cells, "--cells")?;
    let base = args.common.config(args.steps, args.cells[0]);
    base.validate()?;
    let sweep = sweep_space(&base, &args.cells, args.couple_time, args.jobs)?;
    emit(&records_to_csv(&sweep.records), args.output.as_ref())?;
    Ok(true)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, Error> {
    let reports = verify::run_all();
    let mut out = String::from("check,status,detail\n");
    for r in &reports {
        let status = if r.passed { "pass" } else { "fail" };
        out.push_str(&format!("{},{status},{}\n", r.name, csv_field(&r.detail)));
    }
    emit(&out, args.output.as_ref())?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    eprintln!("verify: {} passed, {failed} failed", reports.len() - failed);
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::SweepTime(a) => cmd_sweep_time(a),
        Command::SweepSpace(a) => cmd_sweep_space(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
