//! Success rate of sample-and-move search on the three-peak bandit as the sampling range grows.
//!
//! `cargo run --release --example range_sweep`

use zospi::envs::BanditSpec;
use zospi::zeroth_order::{dense_grid_optimum, range_sweep, ActionSpace, RangeSweepConfig, Sense};

fn main() -> zospi::Result<()> {
    let spec = BanditSpec::three_peaks();
    let space = BanditSpec::domain();
    let f = |a: &[f64]| spec.value(a[0]);
    let (best, optimum) = dense_grid_optimum(&f, &space, 20_001, Sense::Maximize);
    println!("global optimum {optimum:.4} at a = {:.4}", best[0]);

    let cfg = RangeSweepConfig {
        ranges: vec![0.2, 0.5, 1.0, 2.0],
        samples_per_iter: 10,
        iters: 20,
        seeds: (0..100).collect(),
        start: vec![-0.7],
        optimum,
        tolerance: 0.25,
        sense: Sense::Maximize,
    };
    let table = range_sweep(&f, &ActionSpace::symmetric(1, 1.0)?, &cfg)?;
    println!("range  success");
    for (r, p) in &table.success {
        println!("{r:>5.2}  {p:.2}");
    }
    Ok(())
}
