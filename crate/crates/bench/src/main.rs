use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ivasep_bench::config::SchemeName;
use ivasep_bench::{load_and_compare, render, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ivasep-bench", about = "Convergence experiments for accelerated AuxIVA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its traces.
    Run {
        /// TOML experiment file; defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        scheme: Option<SchemeName>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        seed_base: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare trace directories; the first is the reference.
    Compare {
        #[arg(required = true, num_args = 2..)]
        dirs: Vec<PathBuf>,
    },
    /// Print the default experiment file.
    DefaultConfig,
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run {
            config,
            scheme,
            mu,
            q,
            iterations,
            seed_base,
            reps,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = scheme {
                cfg.algorithm.scheme = s;
            }
            if let Some(mu) = mu {
                cfg.algorithm.mu = mu;
            }
            if let Some(q) = q {
                cfg.algorithm.q = q;
            }
            if let Some(n) = iterations {
                cfg.iterations = n;
            }
            if let Some(s) = seed_base {
                cfg.seed_base = s;
            }
            if let Some(n) = reps {
                cfg.repetitions = n;
            }
            if let Some(dir) = out {
                cfg.output_path = dir;
            }
            let output = run_experiment(&cfg)?;
            let failed = output.repetitions.iter().filter(|r| r.failure.is_some()).count();
            if let Some(last) = output.mean.last() {
                println!(
                    "{}: {} repetitions, final SDRi {:.2} dB, SIRi {:.2} dB",
                    cfg.output_path.display(),
                    cfg.repetitions - failed,
                    last.sdr_db,
                    last.sir_db
                );
            }
            for r in output.repetitions.iter().filter(|r| r.failure.is_some()) {
                eprintln!("repetition {} failed: {}", r.rep, r.failure.as_deref().unwrap_or(""));
            }
            Ok(())
        }
        Command::Compare { dirs } => {
            print!("{}", render(&load_and_compare(&dirs)?));
            Ok(())
        }
        Command::DefaultConfig => {
            print!("{}", ExperimentConfig::default().to_toml());
            Ok(())
        }
    }
}
