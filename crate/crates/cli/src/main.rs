use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use memwave_cli::config::RunConfig;
use memwave_core::ModelParams;

#[derive(Parser)]
#[command(
    name = "memwave",
    version,
    about = "Experiments for the wave equation with two exponential memory kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed, overriding `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate a parameter set and report the derived constants.
    CheckParams {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        b1: f64,
        #[arg(long)]
        b2: f64,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = memwave_cli::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Run { config, out, seed } => {
            let outcome = RunConfig::load(&config)
                .map_err(memwave_cli::CliError::from)
                .and_then(|cfg| memwave_cli::run(&cfg, out.as_deref(), seed));
            match outcome {
                Ok(o) => {
                    for (name, _) in &o.files {
                        println!("wrote {}", o.directory.join(name).display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::CheckParams {
            gamma,
            b1,
            b2,
            r1,
            r2,
        } => match ModelParams::new(gamma, b1, b2, r1, r2) {
            Ok(p) => {
                println!("valid");
                println!("b1/r1 + b2/r2 = {}", b1 / r1 + b2 / r2);
                println!("r1 + r2 - b1 - b2 = {}", p.r_sum() - p.b_sum());
                println!(
                    "strong condition 1.5 (b1 + b2) < r1 + r2: {}",
                    p.strong_condition()
                );
                let alpha = p.b_sum() / 2.0;
                if p.gamma() > 4.0 * alpha {
                    let t0 = 2.0 * std::f64::consts::PI
                        / (p.gamma().powi(2) - 16.0 * alpha * alpha).sqrt();
                    println!("control time threshold (asymptotic) = {t0}");
                } else {
                    println!("no control time threshold: gamma <= 2 (b1 + b2)");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(memwave_cli::CliError::from(e).exit_code() as u8)
            }
        },
    }
}
