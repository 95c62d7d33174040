//! `lab`: run rotationally symmetric Ricci flows and check them.
//!
//! Exit codes: 0 success, 1 a verification hard-fail, 2 usage or input
//! error, 3 numerical breakdown.

mod artifacts;
mod run_cmd;
mod scenario_file;
mod small_cmds;
mod verify_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rflab_core::flow::FlowStatus;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    HardFail(String),
    Breakdown(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::HardFail(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Breakdown(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::HardFail(m) => write!(f, "verification failed: {m}"),
            CliError::Breakdown(m) => write!(f, "numerical breakdown: {m}"),
        }
    }
}

const SCENARIO_HELP: &str = "\
Scenario files are TOML with `schema = 1`. Keys and defaults:
  dimension       required, at least 3
  family          required, \"round_sphere\" or \"dumbbell\"
  radius          round_sphere only, required
  neck            dumbbell only, required; orbit radius at the neck
  bump            dumbbell only, default 1.0; radius of the caps
  center          dumbbell only, default 0.5; neck position in (0, 1)
  width           dumbbell only, default 0.2; dent width
  grid_n          default 200; grid intervals, at least 50
  cfl             default 0.4; in (0, 1)
  stop_q_ratio    default 100; stop once sup|Rm| grows by this factor
  max_steps       default 2000000
  output_stride   default 10; steps between snapshots
  adaptive_grid   default true; redistribute nodes as the neck pinches
  profile_stride  default 10; snapshots between stored profiles
  lambda_list     default [1.0, 1.5, 2.0]; exponents of Q·(T−t)^λ
  gh_sample_k     default 5; points per ball sample, 2 to 5
  pairs           default [[0,0,1,0],[0.25,0,0.75,0],[0.45,0,0.55,0],[0.3,0,0.3,1]];
                  ledger point pairs [x_a, angle_a, x_b, angle_b]
Unknown keys are rejected.";

#[derive(Parser)]
#[command(name = "lab", version, about = "Ricci flow singularity lab on rotationally symmetric spheres")]
struct Cli {
    /// Root for run directories and the gallery file.
    #[arg(long, global = true, env = "LAB_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write its artifacts to <output-dir>/<scenario name>.
    #[command(after_help = SCENARIO_HELP)]
    Run { scenario: PathBuf },
    /// Re-check the artifacts of a run directory and write verify_report.json.
    Verify { run_dir: PathBuf },
    /// Print the shrinking soliton table and write gallery.json.
    Gallery,
    /// Exact Gromov–Hausdorff distance between two distance-matrix CSV files.
    Gh {
        space_a: PathBuf,
        space_b: PathBuf,
        /// Keep the base points (row 0) matched.
        #[arg(long)]
        pointed: bool,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let root = artifacts::output_root(cli.output_dir);
    match cli.command {
        Command::Run { scenario } => {
            let outcome = run_cmd::cmd_run(&scenario, &root)?;
            match outcome.status {
                FlowStatus::Breakdown { reason } => Err(CliError::Breakdown(format!(
                    "{reason}; partial artifacts in {}",
                    outcome.dir.display()
                ))),
                _ => Ok(()),
            }
        }
        Command::Verify { run_dir } => {
            let report = verify_cmd::cmd_verify(&run_dir)?;
            if report.hard_fail() {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| c.verdict == rflab_core::Verdict::Fail)
                    .map(|c| c.name.as_str())
                    .collect();
                Err(CliError::HardFail(failed.join(", ")))
            } else {
                Ok(())
            }
        }
        Command::Gallery => small_cmds::cmd_gallery(&root).map(|_| ()),
        Command::Gh {
            space_a,
            space_b,
            pointed,
        } => small_cmds::cmd_gh(&space_a, &space_b, pointed).map(|_| ()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    // a panic is reported as a breakdown rather than Rust's exit code 101
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
        Err(_) => ExitCode::from(3),
    }
}
