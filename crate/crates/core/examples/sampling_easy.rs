//! Restart-based zeroth-order search on a random sampling-easy function.
//!
//! `cargo run --example sampling_easy -- [seed]`

use zospi::rng::rng_from_seed;
use zospi::zeroth_order::{
    make_sampling_easy, zo_consistent_iterate, ActionSpace, ConvergenceBudget, SamplerConfig, SamplingEasySpec,
    Sense, ZoIterConfig,
};

fn main() -> zospi::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let (alpha, beta, eps) = (1.0, 4.0, 1e-3);
    let spec = SamplingEasySpec::random_region(ActionSpace::symmetric(2, 1.0)?, 1.0, alpha, beta, 0.05, seed)?;
    let f = make_sampling_easy(&spec, seed)?;
    let budget = ConvergenceBudget::for_spec(&spec, eps);
    println!("region {:?} .. {:?}", spec.region.low(), spec.region.high());
    println!(
        "inner steps per restart {}, expected restarts {:.1}",
        budget.inner_steps, budget.expected_restarts
    );

    let cfg = ZoIterConfig {
        step_size: 1.0 / (2.0 * beta),
        inner_steps: budget.inner_steps,
        sampler: SamplerConfig {
            n_local: 20,
            n_global: (4.0 * budget.expected_restarts).ceil() as usize,
            local_scale: 0.05,
        },
        sense: Sense::Minimize,
        stop_at: Some(f.min_value() + eps),
    };
    let out = zo_consistent_iterate(f.as_fn(), &spec.domain, &cfg, &mut rng_from_seed(seed))?;
    for r in &out.restarts {
        println!(
            "restart {}: final {:.6}, best {:.6}, {} iterations",
            r.restart, r.final_value, r.best_value, r.iterations
        );
    }
    println!("best point {:?}, gap {:.2e}", out.best_point, out.best_value - f.min_value());
    match out.stopped_at {
        Some((restart, iters)) => println!("eps-optimal after restart {restart}, {iters} iterations"),
        None => println!("no eps-optimal point within the budget"),
    }
    Ok(())
}
