use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nmrqc_cli::config::{parse_mode, CliResult, ExperimentConfig};
use nmrqc_cli::{output, runner};

#[derive(Parser)]
#[command(name = "nmrqc", about = "Run NMR quantum computing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the execution mode: ideal, pulse or pulse+decoherence.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Exit with status 1 when a verdict check fails.
    #[arg(long, global = true)]
    check: bool,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run { config: PathBuf },
    /// Run an experiment once per parameter value and write a CSV.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty. Use --values=-1,... for negatives.
        #[arg(long, num_args = 0..=1, default_value = "", default_missing_value = "")]
        values: String,
    },
}

fn load(cli: &Cli, path: &Path) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(m) = &cli.mode {
        cfg.mode = parse_mode(m)?;
    }
    Ok(cfg)
}

fn parse_values(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| nmrqc_cli::config::invalid(format!("bad sweep value '{v}'"))))
        .collect()
}

fn main_inner(cli: &Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = load(cli, config)?;
            let rep = runner::run(&cfg)?;
            output::write_report(&rep, &cli.out)?;
            println!("{}", rep.verdict);
            for (name, ok) in &rep.checks {
                if !ok {
                    eprintln!("check failed: {name}");
                }
            }
            Ok(rep.passed())
        }
        Command::Sweep { config, param, values } => {
            let cfg = load(cli, config)?;
            let values = parse_values(values)?;
            let csv = output::sweep_csv(&cfg, param, &values)?;
            std::fs::create_dir_all(&cli.out).map_err(|e| nmrqc_cli::config::invalid(e.to_string()))?;
            let path = cli.out.join(format!("sweep_{param}.csv"));
            std::fs::write(&path, &csv).map_err(|e| nmrqc_cli::config::invalid(e.to_string()))?;
            print!("{csv}");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if cli.check => ExitCode::from(1),
        Ok(false) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
