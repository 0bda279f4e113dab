//! Runs a recipe from an in-memory config and reads back its summary.
//!
//! `cargo run --release --example run_recipe`

use zospi::experiments::{run_recipe, ExperimentConfig, RunSummary};

fn main() -> zospi::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        recipe = "synth_converge"
        seeds = [0, 1, 2, 3, 4, 5, 6, 7]
        beta = 4.0
        eps = 1e-3
        "#,
    )?;
    let out = std::env::temp_dir().join("zospi_synth_example");
    let summary = run_recipe(&cfg, &out)?;
    println!("config hash {}", summary.config_hash);
    println!("{}: {:.3} ± {:.3}", summary.metric, summary.aggregate.mean, summary.aggregate.std);

    let again = RunSummary::load(&out.join("summary.json"))?;
    assert_eq!(again.aggregate, summary.aggregate);
    println!("artifacts in {}", out.display());
    Ok(())
}
