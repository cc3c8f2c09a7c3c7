use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mohardy::output::write_all;
use mohardy::{list_experiments, run_with_threads, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "mohardy", version, about = "Numerical experiments on Musielak–Orlicz Hardy spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key=value config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed (overrides `seed` in the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the available experiments.
    List,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            print!("{}", list_experiments());
            ExitCode::SUCCESS
        }
        Command::Run { config, out, seed, threads } => run(config, out, seed, threads),
    }
}

fn run(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>, threads: Option<usize>) -> ExitCode {
    let mut cfg = match ExperimentConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let outcome = match run_with_threads(&cfg, threads) {
        Ok(o) => o,
        Err(RunError::Config(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(RunError::Core(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match write_all(&dir, &outcome.tables, &outcome.series) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    for c in &outcome.checks {
        let status = if c.passed { "ok  " } else { "FAIL" };
        if c.detail.is_empty() {
            println!("{status} {}", c.name);
        } else {
            println!("{status} {} ({})", c.name, c.detail);
        }
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
