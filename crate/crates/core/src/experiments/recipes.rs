use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use super::config::{ExperimentConfig, Recipe};
use super::grid::{dump_policy_grid, write_grid_csv};
use super::summary::{summarize, Aggregate, RunSummary, SeedMetric};
use crate::agent::{eval_seed, evaluate, fmt_float, fsm_eval_starts, run_training, EvalSchedule};
use crate::envs::{fsm_oracle_return, FourSolutionMaze};
use crate::nn::Checkpoint;
use crate::rng::{split_seed, stream_rng, streams};
use crate::zeroth_order::{
    dense_grid_optimum, make_sampling_easy, range_sweep, zo_consistent_iterate, ActionSpace, ConvergenceBudget,
    RangeSweepConfig, SamplerConfig, SamplingEasySpec, Sense, ZoIterConfig,
};
use crate::{Error, Result};

/// Name of the marker left in the output directory when a run fails.
pub const FAILED_MARKER: &str = "FAILED";

/// Environment variable capping the number of seeds run in parallel.
pub const THREADS_VAR: &str = "ZOSPI_THREADS";

struct SeedOutcome {
    seed: u64,
    value: f64,
    details: serde_json::Value,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn seed_csv_path(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed_{seed}.csv"))
}

pub fn eval_csv_path(out: &Path, seed: u64) -> PathBuf {
    out.join("eval").join(format!("seed_{seed}.csv"))
}

pub fn checkpoint_out_path(out: &Path, seed: u64) -> PathBuf {
    out.join("checkpoints").join(format!("seed_{seed}.zckpt"))
}

/// Thread pool sized by `ZOSPI_THREADS` when set, else by rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::config(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))
}

/// Validates `cfg`, runs every seed of its recipe and writes the artifacts under `out`:
/// `seed_<s>.csv` per seed, `summary.json` and `resolved_config.toml`. Training also writes
/// `eval/seed_<s>.csv` and `checkpoints/seed_<s>.zckpt`. A failure leaves a `FAILED` file.
pub fn run_recipe(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let started = Instant::now();
    std::fs::create_dir_all(out)?;
    let marker = out.join(FAILED_MARKER);
    if marker.exists() {
        std::fs::remove_file(&marker)?;
    }
    let hash = cfg.config_hash();
    let mut resolved = cfg.clone();
    resolved.out_dir = None;
    std::fs::write(
        out.join("resolved_config.toml"),
        format!("# config_hash = {hash}\n{}", resolved.resolved_toml()),
    )?;

    let result = (|| {
        let pool = worker_pool()?;
        let outcomes: Vec<Result<SeedOutcome>> =
            pool.install(|| cfg.seeds.par_iter().map(|&s| run_seed(cfg, s, out, &hash)).collect());
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        build_summary(cfg, out, &hash, outcomes, started.elapsed().as_secs_f64())
    })();

    match result {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            std::fs::write(out.join("summary.json"), text + "\n")?;
            Ok(summary)
        }
        Err(e) => {
            std::fs::write(&marker, format!("{e}\n"))?;
            Err(e)
        }
    }
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, out: &Path, hash: &str) -> Result<SeedOutcome> {
    match cfg.recipe {
        Recipe::ZoSim => zo_sim_seed(cfg, seed, out),
        Recipe::SynthConverge => synth_seed(cfg, seed, out),
        Recipe::FsmTrain => fsm_train_seed(cfg, seed, out, hash),
        Recipe::FsmEval => fsm_eval_seed(cfg, seed, out),
        Recipe::GridDump => grid_seed(cfg, seed, out),
    }
}

/// The bandit optimum located on a dense lattice.
pub fn bandit_optimum(cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    let spec = cfg.bandit()?;
    let (x, v) = dense_grid_optimum(
        &|a: &[f64]| spec.value(a[0]),
        &ActionSpace::symmetric(1, 1.0)?,
        cfg.optimum_resolution,
        Sense::Maximize,
    );
    Ok((x[0], v))
}

/// Range-sweep settings for the given seeds, as used by the `zo_sim` recipe.
pub fn sweep_config(cfg: &ExperimentConfig, seeds: Vec<u64>) -> Result<RangeSweepConfig> {
    let (_, optimum) = bandit_optimum(cfg)?;
    Ok(RangeSweepConfig {
        ranges: cfg.ranges.clone(),
        samples_per_iter: cfg.samples_per_iter,
        iters: cfg.iters,
        seeds,
        start: vec![cfg.start],
        optimum,
        tolerance: cfg.tolerance,
        sense: Sense::Maximize,
    })
}

fn zo_sim_seed(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<SeedOutcome> {
    let spec = cfg.bandit()?;
    let sweep = sweep_config(cfg, vec![seed])?;
    let table = range_sweep(&|a: &[f64]| spec.value(a[0]), &ActionSpace::symmetric(1, 1.0)?, &sweep)?;
    let mut w = create(&seed_csv_path(out, seed))?;
    writeln!(w, "range,final_value,success,iterations")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_float(r.range),
            fmt_float(r.final_value),
            r.success as u8,
            r.iterations
        )?;
    }
    w.flush()?;
    let hits: Vec<bool> = table.rows.iter().map(|r| r.success).collect();
    Ok(SeedOutcome {
        seed,
        value: hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64,
        details: json!({ "success": hits }),
    })
}

/// Objective, budget and optimizer settings of one `synth_converge` seed.
pub fn synth_problem(cfg: &ExperimentConfig, seed: u64) -> Result<(SamplingEasySpec, ConvergenceBudget, ZoIterConfig)> {
    let domain = ActionSpace::symmetric(cfg.dim, cfg.domain_bound)?;
    let spec = SamplingEasySpec::random_region(domain, cfg.region_c, cfg.alpha, cfg.beta, cfg.eps0, split_seed(seed, 1))?;
    let budget = ConvergenceBudget::for_spec(&spec, cfg.eps);
    let restarts = (cfg.restart_factor * budget.expected_restarts).ceil() as usize;
    let zo = ZoIterConfig {
        step_size: cfg.step_size(),
        inner_steps: budget.inner_steps,
        sampler: SamplerConfig {
            n_local: cfg.zo_local,
            n_global: restarts.max(1),
            local_scale: cfg.zo_local_scale,
        },
        sense: Sense::Minimize,
        stop_at: Some(spec.min_value + cfg.eps),
    };
    Ok((spec, budget, zo))
}

fn synth_seed(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<SeedOutcome> {
    let (spec, budget, zo) = synth_problem(cfg, seed)?;
    let f = make_sampling_easy(&spec, split_seed(seed, 2))?;
    let outcome = zo_consistent_iterate(f.as_fn(), &spec.domain, &zo, &mut stream_rng(seed, streams::SAMPLER))?;
    let mut w = create(&seed_csv_path(out, seed))?;
    writeln!(w, "restart,final_value,best_value,iterations")?;
    for r in &outcome.restarts {
        writeln!(
            w,
            "{},{},{},{}",
            r.restart,
            fmt_float(r.final_value),
            fmt_float(r.best_value),
            r.iterations
        )?;
    }
    w.flush()?;
    let success = outcome.stopped_at.is_some();
    Ok(SeedOutcome {
        seed,
        value: success as u8 as f64,
        details: json!({
            "success": success,
            "restarts_used": outcome.restarts.len(),
            "restart_budget": zo.sampler.n_global,
            "inner_steps": budget.inner_steps,
            "expected_restarts": budget.expected_restarts,
            "iterations": outcome.iterations,
            "gap": outcome.best_value - spec.min_value,
        }),
    })
}

/// Mean analytic optimum over the evaluation starts of a training seed.
pub fn oracle_eval_mean(cfg: &ExperimentConfig, seed: u64) -> f64 {
    let fsm = cfg.fsm();
    let starts = fsm_eval_starts(&fsm, cfg.eval_episodes, eval_seed(seed));
    starts.iter().map(|&(x, y)| fsm_oracle_return(&fsm, x, y)).sum::<f64>() / starts.len() as f64
}

fn fsm_train_seed(cfg: &ExperimentConfig, seed: u64, out: &Path, hash: &str) -> Result<SeedOutcome> {
    let mut env = FourSolutionMaze::new(cfg.fsm())?;
    let schedule = EvalSchedule {
        interval: cfg.eval_interval,
        episodes: cfg.eval_episodes,
    };
    let (log, agent) = run_training(&cfg.agent(seed), &mut env, cfg.total_steps, Some(schedule))?;
    let mut w = create(&seed_csv_path(out, seed))?;
    log.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&eval_csv_path(out, seed))?;
    log.write_eval_csv(&mut w)?;
    w.flush()?;
    let mut ckpt = agent.checkpoint(seed);
    ckpt.header.config_hash = Some(hash.to_string());
    let path = checkpoint_out_path(out, seed);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    ckpt.save(&path)?;
    let value = log
        .final_eval(cfg.final_window)
        .ok_or_else(|| Error::config("total_steps is shorter than one evaluation interval"))?;
    Ok(SeedOutcome {
        seed,
        value,
        details: json!({ "oracle_mean": oracle_eval_mean(cfg, seed), "episodes": log.episodes.len() }),
    })
}

fn fsm_eval_seed(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<SeedOutcome> {
    let ckpt = Checkpoint::load(&cfg.checkpoint_path(seed)?)?;
    let policy = ckpt
        .network("policy")
        .ok_or_else(|| Error::Format("checkpoint has no policy network".into()))?;
    let fsm = cfg.fsm();
    if policy.input_dim() != 2 || policy.output_dim() != 2 {
        return Err(Error::shape("maze policy must map 2 -> 2"));
    }
    let mut env = FourSolutionMaze::new(fsm.clone())?;
    let es = eval_seed(seed);
    let stats = evaluate(policy, &mut env, cfg.eval_episodes, es)?;
    let starts = fsm_eval_starts(&fsm, cfg.eval_episodes, es);
    let mut w = create(&seed_csv_path(out, seed))?;
    writeln!(w, "episode,start_x,start_y,return,oracle_return")?;
    let mut oracle_total = 0.0;
    for (i, (r, (x, y))) in stats.returns.iter().zip(&starts).enumerate() {
        let o = fsm_oracle_return(&fsm, *x, *y);
        oracle_total += o;
        writeln!(w, "{i},{},{},{},{}", fmt_float(*x), fmt_float(*y), fmt_float(*r), fmt_float(o))?;
    }
    w.flush()?;
    let oracle_mean = oracle_total / starts.len() as f64;
    Ok(SeedOutcome {
        seed,
        value: stats.mean,
        details: json!({ "oracle_mean": oracle_mean, "std": stats.std }),
    })
}

fn grid_seed(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<SeedOutcome> {
    let ckpt = Checkpoint::load(&cfg.checkpoint_path(seed)?)?;
    let points = dump_policy_grid(&ckpt, &cfg.fsm(), cfg.grid_resolution)?;
    let mut w = create(&seed_csv_path(out, seed))?;
    write_grid_csv(&points, &mut w)?;
    w.flush()?;
    let mean = points.iter().map(|p| p.value).sum::<f64>() / points.len() as f64;
    Ok(SeedOutcome {
        seed,
        value: mean,
        details: json!({ "points": points.len() }),
    })
}

fn build_summary(
    cfg: &ExperimentConfig,
    out: &Path,
    hash: &str,
    outcomes: Vec<SeedOutcome>,
    wall: f64,
) -> Result<RunSummary> {
    let per_seed: Vec<SeedMetric> = outcomes
        .iter()
        .map(|o| SeedMetric {
            seed: o.seed,
            value: o.value,
        })
        .collect();
    let seed_details: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| json!({ "seed": o.seed, "details": o.details }))
        .collect();
    let (metric, aggregate, details) = match cfg.recipe {
        Recipe::ZoSim => {
            let n = outcomes.len() as f64;
            let table: Vec<serde_json::Value> = cfg
                .ranges
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let hits = outcomes
                        .iter()
                        .filter(|o| o.details["success"][i].as_bool() == Some(true))
                        .count();
                    json!({ "range": r, "success_rate": hits as f64 / n })
                })
                .collect();
            let (x, v) = bandit_optimum(cfg)?;
            (
                "fraction of ranges reaching the optimum",
                Aggregate::from_values(per_seed),
                json!({ "success_by_range": table, "optimum_action": x, "optimum_value": v }),
            )
        }
        Recipe::SynthConverge => {
            let rate = per_seed.iter().map(|m| m.value).sum::<f64>() / per_seed.len() as f64;
            (
                "reached an eps-optimal point within the restart budget",
                Aggregate::from_values(per_seed),
                json!({ "success_rate": rate, "per_seed": seed_details }),
            )
        }
        Recipe::FsmTrain => {
            let logs: Vec<(u64, PathBuf)> = cfg.seeds.iter().map(|&s| (s, eval_csv_path(out, s))).collect();
            let agg = summarize(&logs, cfg.final_window)?;
            let oracle = outcomes
                .iter()
                .map(|o| o.details["oracle_mean"].as_f64().unwrap_or(f64::NAN))
                .sum::<f64>()
                / outcomes.len() as f64;
            (
                "final evaluation return (mean of the last evaluations)",
                agg,
                json!({ "mode": cfg.mode.name(), "oracle_mean": oracle, "per_seed": seed_details }),
            )
        }
        Recipe::FsmEval => {
            let oracle = outcomes
                .iter()
                .map(|o| o.details["oracle_mean"].as_f64().unwrap_or(f64::NAN))
                .sum::<f64>()
                / outcomes.len() as f64;
            (
                "mean greedy evaluation return",
                Aggregate::from_values(per_seed),
                json!({ "oracle_mean": oracle, "per_seed": seed_details }),
            )
        }
        Recipe::GridDump => (
            "mean critic value over the grid",
            Aggregate::from_values(per_seed),
            json!({ "per_seed": seed_details }),
        ),
    };
    Ok(RunSummary {
        recipe: cfg.recipe.name().to_string(),
        config_hash: hash.to_string(),
        metric: metric.to_string(),
        aggregate,
        wall_clock_secs: wall,
        details,
    })
}
