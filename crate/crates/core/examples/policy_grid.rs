//! Trains briefly, saves a checkpoint, and dumps the policy and critic over a maze grid.
//!
//! `cargo run --release --example policy_grid -- [steps] [out.csv]`

use std::fs::File;
use std::io::BufWriter;

use zospi::agent::{run_training, AgentConfig};
use zospi::envs::{FourSolutionMaze, FsmConfig};
use zospi::experiments::{dump_policy_grid, write_grid_csv};
use zospi::nn::Checkpoint;

fn main() -> zospi::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let out = args.next().unwrap_or_else(|| "policy_grid.csv".into());

    let fsm = FsmConfig::default();
    let cfg = AgentConfig {
        hidden: vec![32, 32],
        batch_size: 32,
        ..AgentConfig::default()
    };
    let mut env = FourSolutionMaze::new(fsm.clone())?;
    let (_, agent) = run_training(&cfg, &mut env, steps, None)?;

    let ckpt_path = std::env::temp_dir().join("policy_grid_example.zckpt");
    agent.checkpoint(cfg.seed).save(&ckpt_path)?;
    let ckpt = Checkpoint::load(&ckpt_path)?;

    let points = dump_policy_grid(&ckpt, &fsm, 11)?;
    write_grid_csv(&points, BufWriter::new(File::create(&out)?))?;
    for p in points.iter().step_by(12) {
        println!(
            "({:5.2}, {:5.2}) -> ({:+.2}, {:+.2})  value {:.2}",
            p.x, p.y, p.dx, p.dy, p.value
        );
    }
    println!("wrote {} grid points to {out}", points.len());
    Ok(())
}
