//! Experiment recipes driven by flat TOML configs, with CSV and JSON artifacts.
//!
//! Each recipe runs once per seed, in parallel across seeds, and writes one CSV per seed.
//! Floats are printed with 17 significant digits, so reruns of the same config produce
//! byte-identical CSVs.

mod config;
mod grid;
mod recipes;
mod summary;

pub use config::{parse_seeds, ExperimentConfig, MaskKind, Recipe};
pub use grid::{dump_policy_grid, write_grid_csv, GridPoint, GRID_COLUMNS};
pub use recipes::{
    bandit_optimum, checkpoint_out_path, eval_csv_path, oracle_eval_mean, run_recipe, seed_csv_path, sweep_config,
    synth_problem, worker_pool, FAILED_MARKER, THREADS_VAR,
};
pub use summary::{summarize, Aggregate, CsvTable, RunSummary, SeedMetric};
