//! Rolls out the analytic optimal policy and a few fixed policies on the maze.
//!
//! `cargo run --example four_solution_maze`

use zospi::agent::{evaluate, fsm_eval_starts, FsmOracle, Policy, ZeroPolicy};
use zospi::envs::{fsm_oracle_return, FourSolutionMaze, FsmConfig};

struct Constant(Vec<f64>);

impl Policy for Constant {
    fn act(&self, _obs: &[f64]) -> zospi::Result<Vec<f64>> {
        Ok(self.0.clone())
    }
}

fn main() -> zospi::Result<()> {
    let cfg = FsmConfig::default();
    let mut env = FourSolutionMaze::new(cfg.clone())?;
    let episodes = 20;
    let seed = 0;

    let oracle_mean = fsm_eval_starts(&cfg, episodes, seed)
        .iter()
        .map(|&(x, y)| fsm_oracle_return(&cfg, x, y))
        .sum::<f64>()
        / episodes as f64;
    println!("N = {}, horizon {}, regions {:?}", cfg.size, cfg.horizon(), cfg.regions());
    println!("analytic optimum over the starts: {oracle_mean:.3}");

    let oracle = FsmOracle { cfg: cfg.clone() };
    let policies: [(&str, &dyn Policy); 4] = [
        ("oracle", &oracle),
        ("stay", &ZeroPolicy(2)),
        ("up", &Constant(vec![0.0, 1.0])),
        ("right", &Constant(vec![1.0, 0.0])),
    ];
    for (name, p) in policies {
        let stats = evaluate(p, &mut env, episodes, seed)?;
        println!("{name:>6}: mean return {:8.3} (std {:.3})", stats.mean, stats.std);
    }
    Ok(())
}
