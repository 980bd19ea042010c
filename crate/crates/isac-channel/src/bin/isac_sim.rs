//! Command-line front end: run drops or sweep campaigns from a scenario
//! config file and export the results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use isac_channel::error::{Error, Result};
use isac_channel::harness::{
    export_campaign, export_drops, run_campaign, run_drop, DropResult, ExportFormat,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "isac-sim",
    version,
    about = "Joint communication and sensing channel simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    /// JSON records plus CIR binaries.
    Json,
    /// CSV tables plus CIR binaries.
    Csv,
    /// All artifact families.
    All,
}

impl From<FormatArg> for ExportFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Json => ExportFormat::JsonRecords,
            FormatArg::Csv => ExportFormat::CsvTables,
            FormatArg::All => ExportFormat::All,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured number of drops and export per-drop results.
    Run {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's root seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's drop count.
        #[arg(long)]
        drops: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::All)]
        format: FormatArg,
        /// Parse and validate the config, then exit without simulating.
        #[arg(long)]
        validate_only: bool,
    },
    /// Sweep shared-cluster counts and export CDF/summary tables.
    Campaign {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated shared-cluster counts, e.g. 4,6,8,10.
        #[arg(long, value_delimiter = ',', required = true)]
        sweep: Vec<usize>,
        /// Override the config's root seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's drop count.
        #[arg(long)]
        drops: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::All)]
        format: FormatArg,
    },
}

fn load_config(path: &PathBuf, seed: Option<u64>, drops: Option<u64>) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::from_file(path)?;
    if let Some(seed) = seed {
        config.root_seed = seed;
    }
    if let Some(drops) = drops {
        config.n_drops = drops;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            drops,
            out,
            format,
            validate_only,
        } => {
            let config = load_config(&config, seed, drops)?;
            if validate_only {
                println!(
                    "config ok: {} targets, hash {}",
                    config.targets.len(),
                    config.config_hash()
                );
                return Ok(());
            }
            let tables = config.tables()?;
            let results: Vec<DropResult> = (0..config.n_drops)
                .map(|drop_id| run_drop(&config, &tables, drop_id))
                .collect::<Result<_>>()?;
            let manifest = export_drops(&results, format.into(), &out)?;
            let mean_sd_c: f64 =
                results.iter().map(|r| r.sd_c).sum::<f64>() / results.len() as f64;
            let mean_sd_s: f64 =
                results.iter().map(|r| r.sd_s).sum::<f64>() / results.len() as f64;
            println!(
                "ran {} drops: mean SD_c {:.4}, mean SD_s {:.4}; wrote {} files to {}",
                results.len(),
                mean_sd_c,
                mean_sd_s,
                manifest.len(),
                out.display()
            );
        }
        Command::Campaign {
            config,
            sweep,
            seed,
            drops,
            out,
            format,
        } => {
            let config = load_config(&config, seed, drops)?;
            let tables = config.tables()?;
            let campaign = run_campaign(&config, &tables, &sweep)?;
            let manifest = export_campaign(&campaign, format.into(), &out)?;
            for point in &campaign.points {
                println!(
                    "count {:>3}: mean SD_c {:.4} (std {:.4}), mean SD_s {:.4} (std {:.4})",
                    point.shared_count,
                    point.mean_sd_c,
                    point.std_sd_c,
                    point.mean_sd_s,
                    point.std_sd_s
                );
            }
            println!(
                "campaign over {} drops x {} counts; wrote {} files to {}",
                campaign.n_drops,
                campaign.points.len(),
                manifest.len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match &err {
                Error::Config(_) => 2u8,
                _ => 3u8,
            };
            ExitCode::from(code)
        }
    }
}
