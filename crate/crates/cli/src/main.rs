mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use config::{config_err, parse_document, parse_seeds, read_source, CliError, RunConfig};
use role_diversity::diagnosis::GuidelineThresholds;
use role_diversity::metrics::TaskMeasurement;

#[derive(Parser)]
#[command(
    name = "role-diversity",
    version,
    about = "Measure role diversity, train strategies and diagnose cooperative tasks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML or JSON); `-` reads stdin.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed list override, e.g. `1,2,3` or `1..8`.
    #[arg(long, global = true, value_parser = seed_list)]
    seeds: Option<SeedList>,
    /// Worker threads for independent training and sweep tasks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone)]
struct SeedList(Vec<u64>);

fn seed_list(s: &str) -> Result<SeedList, String> {
    parse_seeds(s).map(SeedList)
}

#[derive(Subcommand)]
enum Command {
    /// Train the baseline and measure the task's role diversity.
    Measure,
    /// Train the configured strategy over the seed list.
    Train,
    /// Recommend strategies from a measurement.
    Diagnose {
        /// Measurement document, e.g. the output of `measure`.
        #[arg(long)]
        measurement: Option<PathBuf>,
        /// Threshold document; shipped defaults when absent.
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Train and rank a grid of strategies.
    Compare,
    /// Sweep the fitted-Q error decomposition on finite MDPs.
    Theory,
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    let mut cfg: RunConfig = match &cli.config {
        Some(p) => parse_document(&read_source(p)?, &p.display().to_string())?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seeds {
        cfg.seeds = s.0;
    }
    if let Command::Diagnose { measurement, thresholds } = &cli.command {
        if let Some(p) = measurement {
            cfg.measurement = Some(parse_document::<TaskMeasurement>(&read_source(p)?, &p.display().to_string())?);
        }
        if let Some(p) = thresholds {
            cfg.thresholds = Some(parse_document::<GuidelineThresholds>(&read_source(p)?, &p.display().to_string())?);
        }
    }
    cfg.validate()?;
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(config_err("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().map_err(|e| CliError::Runtime(e.into()))?;
    }
    let out = cli.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let hash = cfg.hash();
    let artifacts = match cli.command {
        Command::Measure => commands::measure(&cfg, &hash)?,
        Command::Train => commands::train(&cfg, &hash)?,
        Command::Diagnose { .. } => commands::diagnose(&cfg, &hash)?,
        Command::Compare => commands::compare(&cfg, &hash)?,
        Command::Theory => commands::theory(&cfg, &hash)?,
    };
    output::write_all(&out, &artifacts)?;
    Ok(out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            eprintln!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
