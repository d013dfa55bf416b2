use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hartree_iop::cli::{error_json, run, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "hartree",
    version,
    about = "Hartree equation eigen, ground-state and inverse solvers"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Flat `section.key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set grid.n=401`.
    #[arg(long = "set", global = true, value_name = "K=V")]
    set: Vec<String>,
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Turn warnings such as a non-confining potential into errors.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Principal eigenpair of the linear operator.
    Eig,
    /// Ground state by energy descent.
    Ground,
    /// Inverse optimal problem at a given lambda.
    Iop,
    /// Dual problem at a given kappa.
    Dual,
    /// Principal solutions along a lambda grid.
    Branch,
    /// Seeded invariant suite.
    Check,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let command = match args.command {
        Cmd::Eig => Command::Eig,
        Cmd::Ground => Command::Ground,
        Cmd::Iop => Command::Iop,
        Cmd::Dual => Command::Dual,
        Cmd::Branch => Command::Branch,
        Cmd::Check => Command::Check,
    };
    let mut sets = args.set;
    if let Some(seed) = args.seed {
        sets.push(format!("run.seed={seed}"));
    }
    if args.strict {
        sets.push("run.strict=true".into());
    }
    let started = std::time::Instant::now();
    let result = RunConfig::from_file(args.config.as_deref(), &sets)
        .and_then(|cfg| run(command, &cfg))
        .and_then(|out| out.write(&args.out).map(|_| out));
    match result {
        Ok(out) => {
            println!("{}", out.summary.to_json());
            eprintln!("wall time {:.3} s", started.elapsed().as_secs_f64());
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
