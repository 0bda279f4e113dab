//! Trains one agent on the maze and prints its evaluation curve.
//!
//! `cargo run --release --example train_fsm -- [zospi|dpg|zospi_ucb] [steps] [seed]`

use zospi::agent::{eval_seed, fsm_eval_starts, run_training, AgentConfig, EvalSchedule, UpdateMode};
use zospi::envs::{fsm_oracle_return, FourSolutionMaze, FsmConfig};

fn main() -> zospi::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode: UpdateMode = args.next().as_deref().unwrap_or("zospi").parse()?;
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let mut cfg = AgentConfig {
        mode,
        seed,
        hidden: vec![32, 32],
        batch_size: 32,
        ..AgentConfig::default()
    };
    cfg.bootstrap.local_candidates = true;
    let fsm = FsmConfig::default();
    let mut env = FourSolutionMaze::new(fsm.clone())?;
    let schedule = EvalSchedule::default();

    let starts = fsm_eval_starts(&fsm, schedule.episodes, eval_seed(seed));
    let oracle = starts.iter().map(|&(x, y)| fsm_oracle_return(&fsm, x, y)).sum::<f64>() / starts.len() as f64;

    let (log, _agent) = run_training(&cfg, &mut env, steps, Some(schedule))?;
    println!("mode {}, oracle mean over the evaluation starts {oracle:.2}", mode.name());
    for e in &log.evals {
        println!("{:>7}  {:8.2} ± {:.2}", e.env_step, e.mean_return, e.std_return);
    }
    if let Some(v) = log.final_eval(5) {
        println!("final (last 5 evaluations): {v:.2}");
    }
    Ok(())
}
