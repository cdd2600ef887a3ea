mod config;
mod experiments;
mod output;

use clap::{Parser, Subcommand};
use config::ConfigFile;
use qclab::geometry::CapModel;
use qclab::Error;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable that overrides the configured worker count.
const WORKERS_ENV: &str = "QCLAB_WORKERS";

#[derive(Parser)]
#[command(name = "qclab", version, about = "Query-bounded adversary experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the cap threshold for a cap fraction and dimension.
    Tau {
        #[arg(long)]
        delta: f64,
        #[arg(long, num_args = 1.., required = true)]
        d: Vec<usize>,
        #[arg(long, value_enum, default_value_t = ModelArg::Exact)]
        model: ModelArg,
    },
    /// Write a 1-NN label raster with error mask for the two-intervals task.
    BoundaryDump {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run the experiment described by a TOML config file.
    Run { config: PathBuf },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModelArg {
    Exact,
    Gaussian,
}

impl From<ModelArg> for CapModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Exact => CapModel::Exact,
            ModelArg::Gaussian => CapModel::Gaussian,
        }
    }
}

enum Failure {
    Lib(Error),
    BudgetViolations(u64),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::BudgetExceeded { .. } => 3,
        Error::Numerical(_) => 4,
        _ => 1,
    }
}

fn workers(configured: Option<usize>) -> Result<Option<usize>, Error> {
    let w = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            Error::Config(format!(
                "{WORKERS_ENV} must be a positive integer, got {v:?}"
            ))
        })?),
        Err(_) => configured,
    };
    if w == Some(0) {
        return Err(Error::Config("worker count must be positive".into()));
    }
    Ok(w)
}

fn cmd_run(path: &std::path::Path) -> Result<(), Failure> {
    let started = output::unix_seconds();
    let cfg = ConfigFile::load(path)?;
    let workers = workers(cfg.workers)?;
    let out = experiments::run(&cfg, workers)?;

    std::fs::create_dir_all(&cfg.output)?;
    for (name, bytes) in &out.files {
        output::write_atomic(&cfg.output.join(name), bytes)?;
    }
    let report = json!({ "config": cfg, "results": out.results });
    let mut text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    text.push('\n');
    output::write_atomic(&cfg.output.join("report.json"), text.as_bytes())?;
    let meta = json!({
        "started_unix": started,
        "finished_unix": output::unix_seconds(),
        "workers": workers.unwrap_or_else(rayon::current_num_threads),
        "config_path": path.display().to_string(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    let meta = serde_json::to_string_pretty(&meta).map_err(Error::from)?;
    output::write_atomic(&cfg.output.join("run.meta.json"), meta.as_bytes())?;

    print!("{}", out.summary);
    println!("wrote {}", cfg.output.display());
    if out.budget_violations > 0 {
        return Err(Failure::BudgetViolations(out.budget_violations));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Tau { delta, d, model } => {
            let rows = experiments::tau_rows(delta, &d, model.into())?;
            println!("d,tau,sqrt_d_tau,residual");
            for (d, tau, scaled, residual) in rows {
                println!("{d},{tau},{scaled},{residual:e}");
            }
            Ok(())
        }
        Command::BoundaryDump {
            m,
            z,
            seed,
            resolution,
            output: path,
        } => {
            let bytes = experiments::boundary_dump(m, z, seed, resolution)?;
            output::write_atomic(&path, &bytes)?;
            Ok(())
        }
        Command::Run { config } => cmd_run(&config),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::BudgetViolations(n)) => {
            eprintln!("error: {n} trial(s) exceeded their query budget");
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Domain("x".into())), 2);
        assert_eq!(exit_code(&Error::BudgetExceeded { budget: 4 }), 3);
        assert_eq!(exit_code(&Error::Numerical("nan".into())), 4);
        assert_eq!(exit_code(&Error::Training("x".into())), 1);
    }
}
