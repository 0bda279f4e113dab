//! `zospi <recipe> --config <path> [--seeds 0,1,2] [--out <dir>]`
//!
//! Exit status: 0 on success, 2 on a configuration error, 1 on any other failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use zospi::experiments::{parse_seeds, run_recipe, ExperimentConfig, Recipe};
use zospi::Error;

#[derive(Debug, Parser)]
#[command(name = "zospi", version, about = "Run a ZOSPI experiment recipe")]
struct Cli {
    /// zo_sim, synth_converge, fsm_train, fsm_eval or grid_dump
    recipe: String,
    /// Flat TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds; overrides the config.
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> zospi::Result<()> {
    let recipe: Recipe = cli.recipe.parse()?;
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if cfg.recipe != recipe {
        return Err(Error::Config(format!(
            "command asks for {} but the config is for {}",
            recipe.name(),
            cfg.recipe.name()
        )));
    }
    if let Some(s) = &cli.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    let out = cli
        .out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(recipe.name()));
    cfg.out_dir = Some(out.clone());
    let summary = run_recipe(&cfg, &out)?;
    println!(
        "{}: {} = {:.6} ± {:.6} over {} seeds ({:.1}s) -> {}",
        summary.recipe,
        summary.metric,
        summary.aggregate.mean,
        summary.aggregate.std,
        summary.aggregate.per_seed.len(),
        summary.wall_clock_secs,
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
