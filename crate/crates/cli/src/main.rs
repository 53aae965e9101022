use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mixtilt_cli::config::ExperimentConfig;
use mixtilt_cli::experiment::{run_experiment, ResultRow};
use mixtilt_cli::{list_models, output, tables, RunError};

/// Mixture importance sampling with cross-entropy tuned Gaussian tilts.
///
/// Set RAYON_NUM_THREADS to control the number of workers; results do not
/// depend on it.
#[derive(Parser)]
#[command(name = "mixtilt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// CSV destination; overrides `output.path` in the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reproduce one of the reference tables (1 to 9).
    Table {
        id: u8,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// CSV destination, `table_<id>.csv` by default.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the available models and their parameters.
    Models,
}

type Outcome = (ExperimentConfig, Result<ResultRow, RunError>);

/// Write CSV, sidecar and console table. Returns the exit status of the
/// first failed row, or 0.
fn emit(path: &Path, rows: &[Outcome]) -> Result<u8, RunError> {
    let records: Vec<_> = rows
        .iter()
        .map(|(cfg, out)| match out {
            Ok(row) => output::record(row),
            Err(e) => output::failed_record(cfg, e),
        })
        .collect();
    output::write_csv(path, &records)?;
    let echo: Vec<_> = rows.iter().map(|(c, o)| (c, o.as_ref())).collect();
    output::write_sidecar(&output::sidecar_path(path), &echo)?;
    print!("{}", output::aligned(&records));
    let mut status = 0;
    for (cfg, out) in rows {
        if let Err(e) = out {
            eprintln!("table {} row {}: {e}", cfg.output.table, cfg.output.row);
            if status == 0 {
                status = e.exit_code();
            }
        }
    }
    Ok(status)
}

fn run(cli: Cli) -> Result<u8, RunError> {
    match cli.command {
        Command::Run { config, output } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let path = output
                .or_else(|| cfg.output.path.clone())
                .unwrap_or_else(|| config.with_extension("csv"));
            let out = run_experiment(&cfg);
            emit(&path, &[(cfg, out)])
        }
        Command::Table { id, seed, output } => {
            let rows = tables::reproduce_table(id, seed)?;
            let path = output.unwrap_or_else(|| PathBuf::from(format!("table_{id}.csv")));
            emit(&path, &rows)
        }
        Command::Models => {
            for m in list_models() {
                println!("{}: {}", m.name, m.description);
                println!("  init: {}", m.init_methods.join(", "));
                for (field, meaning) in &m.parameters {
                    println!("  {field:<14} {meaning}");
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("mixtilt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
