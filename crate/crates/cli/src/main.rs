use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use velfree::commands::{self, report_error};
use velfree::{EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK};

#[derive(Parser)]
#[command(name = "velfree", version, about = "Velocity-free manipulator control benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write timeseries.csv, summary.txt and gaincheck.txt.
    Run {
        config: PathBuf,
        /// Output directory [default: $VELFREE_OUT/<config stem>, else out/<config stem>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write error.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Re-run a scenario once per value of one controller gain.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads [default: all cores].
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Evaluate the stability conditions for the configured gains.
    Check { config: PathBuf },
    /// Numerically verify the structural model properties.
    Validate {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    ExitCode::from(dispatch(cli.command))
}

fn dispatch(command: Command) -> u8 {
    match command {
        Command::Run { config, out, plot } => match commands::run(&config, out.as_deref(), plot) {
            Ok(outcome) => {
                print!("{}", outcome.summary);
                println!("artifacts in {}", outcome.dir.display());
                if let velfree_core::sim::SimStatus::Diverged { time, reason } = &outcome.result.status {
                    eprintln!("diverged at t = {time}: {reason}");
                    return EXIT_DIVERGED;
                }
                outcome.exit_code()
            }
            Err(e) => report_error(&e),
        },
        Command::Sweep { config, param, values, out, jobs } => {
            if let Some(j) = jobs {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
            }
            match commands::sweep(&config, &param, &values, out.as_deref()) {
                Ok((dir, _, table)) => {
                    print!("{table}");
                    println!("sweep.csv in {}", dir.display());
                    EXIT_OK
                }
                Err(e) => report_error(&e),
            }
        }
        Command::Check { config } => match commands::check(&config) {
            Ok((_, text)) => {
                print!("{text}");
                EXIT_OK
            }
            Err(e) => report_error(&e),
        },
        Command::Validate { model, samples, seed } => match commands::validate(&model, samples, seed) {
            Ok((lines, text)) => {
                print!("{text}");
                commands::exit_for_validation(&lines)
            }
            Err(e) => report_error(&e),
        },
    }
}
