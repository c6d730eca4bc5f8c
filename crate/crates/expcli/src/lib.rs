//! Experiment driver for `freebell`: runs an experiment from a [`RunConfig`],
//! writes `config.json`, `results.csv`, side artifacts and an optional plot.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod record;

use std::fs;
use std::path::Path;

pub use config::{Experiment, RunConfig};
pub use record::RunRecord;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(freebell::Error),
    #[error("I/O failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<freebell::Error> for CliError {
    fn from(e: freebell::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(serde::Serialize)]
struct ConfigFile<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
}

/// Runs `cfg` and writes every output file into `cfg.output_dir`.
pub fn execute(cfg: &RunConfig) -> Result<Vec<RunRecord>, CliError> {
    let out = experiments::run(cfg)?;
    let dir = &cfg.output_dir;
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;

    let meta = ConfigFile {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
    };
    let config_path = dir.join("config.json");
    fs::write(
        &config_path,
        serde_json::to_string_pretty(&meta).expect("serializable") + "\n",
    )
    .map_err(|e| io(&config_path, e))?;

    let csv_path = dir.join("results.csv");
    let file = fs::File::create(&csv_path).map_err(|e| io(&csv_path, e))?;
    record::write_csv(&out.records, std::io::BufWriter::new(file))?;

    for (name, contents) in &out.artifacts {
        let p = dir.join(name);
        fs::write(&p, contents).map_err(|e| io(&p, e))?;
    }
    if cfg.emit_plot {
        plot::emit_plot(&out.records, &dir.join("plot.svg"))?;
    }
    Ok(out.records)
}
