use std::path::Path;
use std::process::Command;

use zospi::agent::EVAL_COLUMNS;
use zospi::envs::BanditSpec;
use zospi::experiments::{
    eval_csv_path, run_recipe, seed_csv_path, summarize, sweep_config, CsvTable, ExperimentConfig, RunSummary,
    FAILED_MARKER, GRID_COLUMNS,
};
use zospi::zeroth_order::{range_sweep, ActionSpace};
use zospi::Error;

fn tiny_training(mode: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        r#"
        recipe = "fsm_train"
        seeds = [0, 1]
        mode = "{mode}"
        total_steps = 1200
        warmup_steps = 200
        batch_size = 16
        hidden = [8]
        n_local = 5
        n_global = 5
        n_target = 5
        ensemble_size = 2
        eval_interval = 400
        eval_episodes = 2
        final_window = 2
        "#
    ))
    .unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zospi"))
}

#[test]
fn zo_sim_reproduces_the_range_sweep_table() {
    let mut cfg = ExperimentConfig::from_toml_str("recipe = \"zo_sim\"").unwrap();
    cfg.seeds = (0..12).collect();
    let dir = tempfile::tempdir().unwrap();
    let summary = run_recipe(&cfg, dir.path()).unwrap();
    let spec = BanditSpec::three_peaks();
    let table = range_sweep(
        &|a: &[f64]| spec.value(a[0]),
        &ActionSpace::symmetric(1, 1.0).unwrap(),
        &sweep_config(&cfg, cfg.seeds.clone()).unwrap(),
    )
    .unwrap();
    let rates: Vec<f64> = summary.details["success_by_range"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["success_rate"].as_f64().unwrap())
        .collect();
    assert_eq!(rates, table.success.iter().map(|s| s.1).collect::<Vec<_>>());
    for &seed in &cfg.seeds {
        let csv = CsvTable::read(&seed_csv_path(dir.path(), seed)).unwrap();
        let finals = csv.floats("final_value").unwrap();
        let want: Vec<f64> = table.rows.iter().filter(|r| r.seed == seed).map(|r| r.final_value).collect();
        assert_eq!(finals, want);
    }
}

#[test]
fn training_summary_is_recomputable_from_the_eval_csvs() {
    let cfg = tiny_training("zospi");
    let dir = tempfile::tempdir().unwrap();
    let summary = run_recipe(&cfg, dir.path()).unwrap();
    let logs: Vec<_> = cfg.seeds.iter().map(|&s| (s, eval_csv_path(dir.path(), s))).collect();
    assert_eq!(summarize(&logs, cfg.final_window).unwrap(), summary.aggregate);
    assert_eq!(RunSummary::load(&dir.path().join("summary.json")).unwrap(), summary);
    assert_eq!(summary.config_hash, cfg.config_hash());
    let resolved = std::fs::read_to_string(dir.path().join("resolved_config.toml")).unwrap();
    assert!(resolved.contains(&summary.config_hash));

    let eval = CsvTable::read(&eval_csv_path(dir.path(), 0)).unwrap();
    assert_eq!(eval.header, EVAL_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    assert_eq!(eval.rows.len(), 3);
}

#[test]
fn summaries_reject_csvs_with_the_wrong_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "env_step,mean\n1,2\n").unwrap();
    match summarize(&[(0, path)], 1) {
        Err(Error::Format(msg)) => assert!(msg.contains("mean_return"), "{msg}"),
        other => panic!("expected a format error, got {other:?}"),
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "summary.json" {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn every_training_mode_reruns_byte_identically() {
    for mode in ["zospi", "dpg", "zospi_ucb"] {
        let cfg = tiny_training(mode);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_recipe(&cfg, a.path()).unwrap();
        run_recipe(&cfg, b.path()).unwrap();
        let (fa, fb) = (read_all(a.path()), read_all(b.path()));
        assert!(fa.len() >= 7, "{mode}: {:?}", fa.iter().map(|f| &f.0).collect::<Vec<_>>());
        assert_eq!(fa, fb, "{mode}");
    }
}

#[test]
fn eval_and_grid_recipes_read_training_checkpoints() {
    let train = tempfile::tempdir().unwrap();
    run_recipe(&tiny_training("zospi_ucb"), train.path()).unwrap();
    let ckpts = train.path().join("checkpoints");

    let out = tempfile::tempdir().unwrap();
    let mut eval = ExperimentConfig::from_toml_str("recipe = \"fsm_eval\"\nseeds = [0, 1]\neval_episodes = 3").unwrap();
    eval.checkpoint_dir = Some(ckpts.clone());
    let s = run_recipe(&eval, out.path()).unwrap();
    let csv = CsvTable::read(&seed_csv_path(out.path(), 1)).unwrap();
    let returns = csv.floats("return").unwrap();
    let oracle = csv.floats("oracle_return").unwrap();
    assert_eq!(returns.len(), 3);
    assert!(returns.iter().zip(&oracle).all(|(r, o)| r <= &(o + 1e-9)));
    assert!(s.aggregate.mean <= s.details["oracle_mean"].as_f64().unwrap() + 1e-9);

    let mut grid = ExperimentConfig::from_toml_str("recipe = \"grid_dump\"\nseeds = [0]\ngrid_resolution = 5").unwrap();
    grid.checkpoint_dir = Some(ckpts);
    run_recipe(&grid, out.path()).unwrap();
    let csv = CsvTable::read(&seed_csv_path(out.path(), 0)).unwrap();
    assert_eq!(csv.header, GRID_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    assert_eq!(csv.rows.len(), 25);
    assert!(csv.floats("action_dx").unwrap().iter().all(|a| a.abs() <= 1.0));
}

#[test]
fn config_hash_ignores_the_output_directory_only() {
    let a = tiny_training("zospi");
    let mut b = a.clone();
    b.out_dir = Some("elsewhere".into());
    assert_eq!(a.config_hash(), b.config_hash());
    b.gamma = 0.98;
    assert_ne!(a.config_hash(), b.config_hash());
}

#[test]
fn bad_configs_are_config_errors() {
    assert!(ExperimentConfig::from_toml_str("recipe = \"fsm_train\"\nbogus = 1").unwrap_err().is_config());
    assert!(ExperimentConfig::from_toml_str("recipe = \"nope\"").unwrap_err().is_config());
    let mut cfg = tiny_training("zospi");
    cfg.warmup_steps = 4;
    assert!(cfg.validate().unwrap_err().is_config());
    let mut cfg = tiny_training("zospi");
    cfg.seeds = vec![1, 1];
    assert!(cfg.validate().unwrap_err().is_config());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("zo.toml");
    std::fs::write(&good, "recipe = \"zo_sim\"\nseeds = [0]\n").unwrap();
    let out = dir.path().join("out");
    let st = bin()
        .args(["zo_sim", "--config"])
        .arg(&good)
        .args(["--seeds", "3,4"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(seed_csv_path(&out, 3).exists() && seed_csv_path(&out, 4).exists());
    assert!(!seed_csv_path(&out, 0).exists());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "recipe = \"zo_sim\"\nsamples_per_iter = \"ten\"\n").unwrap();
    let st = bin().args(["zo_sim", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = bin().args(["fsm_train", "--config"]).arg(&good).status().unwrap();
    assert_eq!(st.code(), Some(2), "recipe mismatch");
    let st = bin().args(["zo_sim", "--config"]).arg(&good).args(["--seeds", "x"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = bin().arg("zo_sim").status().unwrap();
    assert_eq!(st.code(), Some(2), "missing --config");

    // A missing checkpoint is caught up front; a corrupt one fails at run time and leaves a marker.
    let eval = dir.path().join("eval.toml");
    let ckpts = dir.path().join("ckpts");
    std::fs::create_dir_all(&ckpts).unwrap();
    std::fs::write(
        &eval,
        format!("recipe = \"fsm_eval\"\nseeds = [0]\ncheckpoint_dir = {:?}\n", ckpts.display().to_string()),
    )
    .unwrap();
    let out = dir.path().join("eval_out");
    let st = bin().args(["fsm_eval", "--config"]).arg(&eval).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));
    std::fs::write(ckpts.join("seed_0.zckpt"), b"not a checkpoint").unwrap();
    let st = bin().args(["fsm_eval", "--config"]).arg(&eval).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(1));
    assert!(out.join(FAILED_MARKER).exists());

    let st = bin()
        .args(["zo_sim", "--config"])
        .arg(&good)
        .env("ZOSPI_THREADS", "0")
        .arg("--out")
        .arg(dir.path().join("t"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}
