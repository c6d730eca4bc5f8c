use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use freebell_cli::{execute, CliError, Experiment, RunConfig};

/// Run a freebell experiment and write config.json, results.csv and
/// optionally plot.svg to the output directory.
#[derive(Parser, Debug)]
#[command(name = "freebell", version)]
struct Cli {
    /// chsh-random | chsh-truncated | steering | uncertainty | moments |
    /// freeness | complex-chsh | folner
    experiment: Option<String>,
    /// JSON file mirroring RunConfig; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Number of observables for steering, uncertainty and moments
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: bool,
    /// Worker threads (0 = automatic)
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated families for steering and uncertainty
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
    /// Comma-separated 1-based index word for the freeness test
    #[arg(long, value_delimiter = ',')]
    word: Option<Vec<usize>>,
    /// Record per-trial wall time (makes results.csv non-reproducible)
    #[arg(long)]
    timing: bool,
}

fn build_config(cli: Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    match (&cli.experiment, &cli.config) {
        (Some(e), _) => cfg.experiment = e.parse::<Experiment>()?,
        (None, None) => return Err(CliError::Config("no experiment given".into())),
        (None, Some(_)) => {}
    }
    if let Some(v) = cli.dims {
        cfg.dims = v;
    }
    if let Some(v) = cli.trials {
        cfg.trials = v;
    }
    if let Some(v) = cli.n {
        cfg.n_observables = v;
    }
    if let Some(v) = cli.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = cli.k_max {
        cfg.k_max = v;
    }
    if let Some(v) = cli.out {
        cfg.output_dir = v;
    }
    if let Some(v) = cli.threads {
        cfg.threads = v;
    }
    if let Some(v) = cli.families {
        cfg.families = v;
    }
    if let Some(v) = cli.word {
        cfg.word = v;
    }
    cfg.emit_plot |= cli.plot;
    cfg.timing |= cli.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli).and_then(|cfg| execute(&cfg).map(|r| (cfg, r)));
    match result {
        Ok((cfg, records)) => {
            println!(
                "{} records written to {}",
                records.len(),
                cfg.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
