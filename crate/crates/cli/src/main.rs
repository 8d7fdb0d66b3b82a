use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tiltrotor_cli::{exit, CliError, Outcome, Overrides, RunConfig};
use tiltrotor_design::CostFunction;
use tiltrotor_sim::ControllerKind;

#[derive(Parser, Debug)]
#[command(name = "tiltrotor", version, about = "Design and simulate tiltrotor omnidirectional aerial vehicles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the optimizer starts and the sensor noise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trajectory letter a..g or a JSON waypoint file.
    #[arg(long, global = true)]
    traj: Option<String>,
    #[arg(long, global = true)]
    controller: Option<ControllerArg>,
    /// Tilt bias near colinear arm thrusts.
    #[arg(long, global = true)]
    bias: Option<Switch>,
    /// Start with this many arms wound one full turn and enable unwinding.
    #[arg(long, global = true)]
    unwind: Option<usize>,
    /// 1: vertical force, 2: omnidirectional force and torque.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..=2))]
    cost: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize the arm angles and write the design report.
    Optimize,
    /// Force and torque envelopes of given arm angles.
    Envelope,
    /// Envelope extrema over alternating arm inclinations.
    Sweep,
    /// Closed-loop simulation of a trajectory.
    Simulate,
    /// Allocation condition number over hover force directions.
    ConditionScan,
    /// Fit the mass model constants to a target mass and inertia.
    CalibrateMass,
    /// Print the effective configuration as JSON.
    Config,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ControllerArg {
    Lqri,
    Pid,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            trajectory: self.traj.clone(),
            controller: self.controller.map(|c| match c {
                ControllerArg::Lqri => ControllerKind::Lqri,
                ControllerArg::Pid => ControllerKind::Pid,
            }),
            bias: self.bias.map(|b| matches!(b, Switch::On)),
            unwind: self.unwind,
            cost: self.cost.and_then(CostFunction::from_index),
        }
    }
}

fn execute(cli: &Cli) -> Result<Option<Outcome>, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply(&cli.overrides());
    let out = &cli.out;
    let outcome = match cli.command {
        Command::Optimize => tiltrotor_cli::optimize(&cfg, out)?,
        Command::Envelope => tiltrotor_cli::envelope(&cfg, out)?,
        Command::Sweep => tiltrotor_cli::sweep(&cfg, out)?,
        Command::Simulate => tiltrotor_cli::simulate(&cfg, out)?,
        Command::ConditionScan => tiltrotor_cli::condition_scan(&cfg, out)?,
        Command::CalibrateMass => tiltrotor_cli::calibrate_mass(&cfg, out)?,
        Command::Config => {
            println!("{}", serde_json::to_string_pretty(&cfg).expect("configuration serializes"));
            return Ok(None);
        }
    };
    Ok(Some(outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(None) => exit::SUCCESS,
        Ok(Some(outcome)) => {
            for line in &outcome.messages {
                println!("{line}");
            }
            println!("manifest: {}", outcome.manifest_path.display());
            match outcome.failure {
                Some(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
                None => exit::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
