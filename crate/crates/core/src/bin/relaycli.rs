use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mobile_relay::channel::{generate_trajectory, PhyParams, TrajectoryPattern};
use mobile_relay::scenario::{self, trajectory_csv, EmitCsv, ScenarioConfig};
use mobile_relay::RelayError;

/// Throughput-optimal power allocation for a mobile relay.
///
/// Failures print `error[<category>]: <message>` on stderr and exit with
/// 3 config, 4 parameter, 5 solver, 6 unsupported, 7 parse, 8 io,
/// 9 verification; 2 is a usage error.
#[derive(Parser)]
#[command(name = "relaycli", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print the per-slot allocation as CSV.
    Solve {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Throughput for every (scheme, horizon) pair.
    Sweep {
        config: PathBuf,
        /// Horizons in seconds, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        t_list: Vec<f64>,
        /// toward_dest, toward_source, static_mid, static:<x0>, cyclic_mid or cyclic:<lo>:<hi>.
        #[arg(long, value_delimiter = ',', required = true)]
        schemes: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print a trajectory and its link gains as CSV.
    Trajectory {
        pattern: String,
        #[arg(long, short = 'n')]
        n_slots: usize,
        /// Take the geometry from this scenario instead of the reference one.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve and cross-check against the grid-search oracle (N <= 4).
    Verify { config: PathBuf },
}

enum Failure {
    Relay(RelayError),
    Verification,
}

impl From<RelayError> for Failure {
    fn from(e: RelayError) -> Self {
        Failure::Relay(e)
    }
}

fn write_out(output: Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(&path, text).map_err(|e| Failure::Relay(RelayError::io_at(&path, e))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { config, output } => {
            let record = scenario::run_solve(&ScenarioConfig::load(config)?)?;
            eprintln!("wall_time_s = {:.3}", record.wall_time.as_secs_f64());
            write_out(output, &record.emit_csv())
        }
        Command::Sweep {
            config,
            t_list,
            schemes,
            output,
        } => {
            let config = ScenarioConfig::load(config)?;
            let schemes = schemes
                .iter()
                .map(|s| TrajectoryPattern::parse(s, config.phy.distance))
                .collect::<Result<Vec<_>, _>>()?;
            let table = scenario::run_sweep(&config, &t_list, &schemes)?;
            write_out(output, &table.emit_csv())
        }
        Command::Trajectory {
            pattern,
            n_slots,
            config,
            output,
        } => {
            let phy = match config {
                Some(path) => ScenarioConfig::load(path)?.phy,
                None => PhyParams::reference(),
            };
            let pattern = TrajectoryPattern::parse(&pattern, phy.distance)?;
            let traj = generate_trajectory(pattern, phy, n_slots)?;
            write_out(output, &trajectory_csv(&traj))
        }
        Command::Verify { config } => {
            let report = scenario::verify(&ScenarioConfig::load(config)?)?;
            print!("{}", report.render());
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.render().to_string();
            eprint!("error[usage]: {}", msg.strip_prefix("error: ").unwrap_or(&msg));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Relay(e)) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Verification) => {
            eprintln!("error[verification]: solver and oracle disagree");
            ExitCode::from(9)
        }
    }
}
