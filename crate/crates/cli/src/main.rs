use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sben_cli::{load_config, output_root, CliError, RunConfig};
use sben_core::scenarios::Solver;

/// Symplectic BEN solvers for lumped dissipative systems.
///
/// Outputs go under $SBEN_OUTPUT_ROOT (default: the current directory).
#[derive(Parser)]
#[command(name = "sben", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configs and write series, profile and summary.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Run independent configs concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Audit the scenario's dissipation law.
    Audit { config: PathBuf },
    /// Run the configured solver against a reference solver.
    Compare {
        config: PathBuf,
        #[arg(long, default_value = "oracle", value_parser = parse_solver)]
        against: Solver,
    },
    /// Repeat the run over several time steps.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        dt_list: Vec<f64>,
    },
    /// Print the config with defaults filled in.
    Check { config: PathBuf },
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    Solver::ALL
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| format!("unknown solver `{s}`; valid: {}", Solver::ALL.map(Solver::name).join(", ")))
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<RunConfig>, CliError> {
    paths.iter().map(|p| load_config(p)).collect()
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let root = output_root();
    match cli.command {
        Command::Run { configs, jobs } => {
            let cfgs = load_all(&configs)?;
            let mut first_err = None;
            for (path, r) in configs.iter().zip(sben_cli::run_batch(&cfgs, jobs, &root)) {
                match r {
                    Ok(s) => println!(
                        "{}: {} {} steps, Π = {:.3e}, dissipation = {:.6e}, {:.3}s",
                        path.display(),
                        s.solver.name(),
                        s.steps,
                        s.functional.map_or(f64::NAN, |p| p.to_f64()),
                        s.total_dissipation.unwrap_or(f64::NAN),
                        s.wall_time_s
                    ),
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        first_err.get_or_insert(e);
                    }
                }
            }
            first_err.map_or(Ok(()), Err)
        }
        Command::Audit { config } => {
            let report = sben_cli::audit(&load_config(&config)?, &root)?;
            for a in &report.audits {
                println!(
                    "{} {}: {:.3e} over {} finite of {} samples",
                    if a.passed { "PASS" } else { "FAIL" },
                    a.name,
                    a.value,
                    a.finite_samples,
                    a.samples
                );
            }
            Ok(())
        }
        Command::Compare { config, against } => {
            let c = sben_cli::compare(&load_config(&config)?, against, &root)?;
            for (col, d) in &c.max_deviation {
                println!("{col}: max |{} − {}| = {d:.3e}", c.solver.name(), c.against.name());
            }
            Ok(())
        }
        Command::Sweep { config, dt_list } => {
            for r in sben_cli::sweep(&load_config(&config)?, &dt_list, &root)? {
                println!("dt = {:e}: Π = {:.3e}, dissipation = {:.6e}", r.dt, r.functional.to_f64(), r.total_dissipation);
            }
            Ok(())
        }
        Command::Check { config } => {
            println!("{}", load_config(&config)?.to_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
