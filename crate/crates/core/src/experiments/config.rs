//! Flat TOML experiment configuration.
//!
//! Every key is optional except `recipe`; omitted keys take the defaults listed in
//! [`ExperimentConfig::default`]. Unknown keys are rejected. The resolved configuration
//! (with defaults filled in) is written next to the outputs and hashed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{AgentConfig, TargetPolicyState, UpdateMode};
use crate::bootstrap_ucb::{BootstrapConfig, MaskScheme};
use crate::envs::{BanditSpec, Bump, FsmConfig, RewardTiming};
use crate::nn::Activation;
use crate::zeroth_order::SamplerConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    /// Success rate of sample-and-move search versus sampling range on the bandit landscape.
    ZoSim,
    /// Restart-based consistent iteration on random sampling-easy functions.
    SynthConverge,
    /// Train an agent on the Four-Solution-Maze.
    FsmTrain,
    /// Evaluate trained maze checkpoints against the analytic optimum.
    FsmEval,
    /// Dump policy arrows and values on a lattice over the maze.
    GridDump,
}

impl Recipe {
    pub fn name(self) -> &'static str {
        match self {
            Recipe::ZoSim => "zo_sim",
            Recipe::SynthConverge => "synth_converge",
            Recipe::FsmTrain => "fsm_train",
            Recipe::FsmEval => "fsm_eval",
            Recipe::GridDump => "grid_dump",
        }
    }
}

impl std::str::FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zo_sim" => Ok(Recipe::ZoSim),
            "synth_converge" => Ok(Recipe::SynthConverge),
            "fsm_train" => Ok(Recipe::FsmTrain),
            "fsm_eval" => Ok(Recipe::FsmEval),
            "grid_dump" => Ok(Recipe::GridDump),
            other => Err(Error::config(format!("unknown recipe {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    #[default]
    AllOnes,
    Bernoulli,
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub recipe: Recipe,
    pub seeds: Vec<u64>,
    /// Output directory; the command line `--out` takes precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,

    // maze
    pub fsm_size: usize,
    pub region_reward: f64,
    pub step_penalty: f64,
    pub reward_timing: RewardTiming,

    // agent
    pub mode: UpdateMode,
    pub total_steps: usize,
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub updates_per_step: usize,
    pub warmup_steps: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub exploration_noise: f64,
    pub buffer_capacity: usize,
    pub target_policy_state: TargetPolicyState,
    pub n_local: usize,
    pub n_global: usize,
    pub local_scale: f64,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Number of trailing evaluations averaged into a seed's final score.
    pub final_window: usize,

    // ensemble
    pub ensemble_size: usize,
    pub ucb_coef: f64,
    pub n_target: usize,
    pub mask_scheme: MaskKind,
    pub mask_p: f64,
    pub ucb_local_candidates: bool,
    pub ucb_score_with_target: bool,

    // checkpoints consumed by fsm_eval and grid_dump: `<dir>/seed_<s>.zckpt`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint_dir: Option<PathBuf>,
    pub grid_resolution: usize,

    // zo_sim
    pub ranges: Vec<f64>,
    pub samples_per_iter: usize,
    pub iters: usize,
    pub start: f64,
    pub tolerance: f64,
    pub bump_centers: Vec<f64>,
    pub bump_widths: Vec<f64>,
    pub bump_heights: Vec<f64>,
    /// Lattice size for locating the landscape's global optimum.
    pub optimum_resolution: usize,

    // synth_converge
    pub dim: usize,
    pub domain_bound: f64,
    pub alpha: f64,
    pub beta: f64,
    pub region_c: f64,
    pub eps0: f64,
    pub eps: f64,
    pub zo_local: usize,
    pub zo_local_scale: f64,
    /// Step size; zero selects `1 / (2 * beta)`.
    pub zo_step_size: f64,
    /// Restart budget as a multiple of the expected restart count `dim / region_c`.
    pub restart_factor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let agent = AgentConfig::default();
        let boot = BootstrapConfig::default();
        let fsm = FsmConfig::default();
        let bandit = BanditSpec::three_peaks();
        Self {
            recipe: Recipe::FsmTrain,
            seeds: vec![0, 1, 2, 3, 4],
            out_dir: None,
            fsm_size: fsm.size,
            region_reward: fsm.region_reward,
            step_penalty: fsm.step_penalty,
            reward_timing: fsm.reward_timing,
            mode: agent.mode,
            total_steps: 100_000,
            gamma: agent.gamma,
            tau: agent.tau,
            batch_size: agent.batch_size,
            updates_per_step: agent.updates_per_step,
            warmup_steps: agent.warmup_steps,
            hidden: agent.hidden.clone(),
            activation: agent.activation,
            actor_lr: agent.actor_lr,
            critic_lr: agent.critic_lr,
            exploration_noise: agent.exploration_noise,
            buffer_capacity: agent.buffer_capacity,
            target_policy_state: agent.target_policy_state,
            n_local: agent.sampler.n_local,
            n_global: agent.sampler.n_global,
            local_scale: agent.sampler.local_scale,
            eval_interval: 2000,
            eval_episodes: 10,
            final_window: 10,
            ensemble_size: boot.ensemble_size,
            ucb_coef: boot.ucb_coef,
            n_target: boot.n_target,
            mask_scheme: MaskKind::AllOnes,
            mask_p: 0.5,
            ucb_local_candidates: boot.local_candidates,
            ucb_score_with_target: boot.score_with_target,
            checkpoint_dir: None,
            grid_resolution: 21,
            ranges: vec![0.2, 0.5, 1.0, 2.0],
            samples_per_iter: 10,
            iters: 20,
            start: -0.7,
            tolerance: 0.25,
            bump_centers: bandit.bumps.iter().map(|b| b.center).collect(),
            bump_widths: bandit.bumps.iter().map(|b| b.width).collect(),
            bump_heights: bandit.bumps.iter().map(|b| b.height).collect(),
            optimum_resolution: 20_001,
            dim: 2,
            domain_bound: 1.0,
            alpha: 1.0,
            beta: 4.0,
            region_c: 1.0,
            eps0: 0.05,
            eps: 1e-3,
            zo_local: 20,
            zo_local_scale: 0.05,
            zo_step_size: 0.0,
            restart_factor: 4.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// The configuration with every default written out.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the resolved configuration without the output directory.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        hex::encode(Sha256::digest(c.resolved_toml().as_bytes()))
    }

    pub fn fsm(&self) -> FsmConfig {
        FsmConfig {
            size: self.fsm_size,
            region_reward: self.region_reward,
            step_penalty: self.step_penalty,
            reward_timing: self.reward_timing,
        }
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            n_local: self.n_local,
            n_global: self.n_global,
            local_scale: self.local_scale,
        }
    }

    pub fn mask(&self) -> MaskScheme {
        match self.mask_scheme {
            MaskKind::AllOnes => MaskScheme::AllOnes,
            MaskKind::Bernoulli => MaskScheme::Bernoulli { p: self.mask_p },
            MaskKind::Poisson => MaskScheme::Poisson,
        }
    }

    pub fn agent(&self, seed: u64) -> AgentConfig {
        AgentConfig {
            gamma: self.gamma,
            tau: self.tau,
            batch_size: self.batch_size,
            updates_per_step: self.updates_per_step,
            sampler: self.sampler(),
            warmup_steps: self.warmup_steps,
            mode: self.mode,
            seed,
            hidden: self.hidden.clone(),
            activation: self.activation,
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
            exploration_noise: self.exploration_noise,
            buffer_capacity: self.buffer_capacity,
            target_policy_state: self.target_policy_state,
            bootstrap: BootstrapConfig {
                ensemble_size: self.ensemble_size,
                ucb_coef: self.ucb_coef,
                n_target: self.n_target,
                mask: self.mask(),
                local_candidates: self.ucb_local_candidates,
                score_with_target: self.ucb_score_with_target,
            },
        }
    }

    pub fn bandit(&self) -> Result<BanditSpec> {
        let n = self.bump_centers.len();
        if self.bump_widths.len() != n || self.bump_heights.len() != n {
            return Err(Error::config("bump_centers, bump_widths and bump_heights must have equal lengths"));
        }
        BanditSpec::new(
            (0..n)
                .map(|i| Bump::new(self.bump_centers[i], self.bump_widths[i], self.bump_heights[i]))
                .collect(),
        )
    }

    pub fn step_size(&self) -> f64 {
        if self.zo_step_size > 0.0 {
            self.zo_step_size
        } else {
            1.0 / (2.0 * self.beta)
        }
    }

    pub fn checkpoint_path(&self, seed: u64) -> Result<PathBuf> {
        let dir = self
            .checkpoint_dir
            .as_ref()
            .ok_or_else(|| Error::config(format!("recipe {} needs checkpoint_dir", self.recipe.name())))?;
        Ok(dir.join(format!("seed_{seed}.zckpt")))
    }

    /// Checks everything the chosen recipe depends on, before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must be nonempty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        match self.recipe {
            Recipe::ZoSim => {
                self.bandit()?;
                if self.samples_per_iter == 0 || self.iters == 0 {
                    return Err(Error::config("samples_per_iter and iters must be >= 1"));
                }
                if self.ranges.is_empty() || self.ranges.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                    return Err(Error::config("ranges must be a nonempty list of non-negative numbers"));
                }
                if !(-1.0..=1.0).contains(&self.start) {
                    return Err(Error::config("start must lie in [-1, 1]"));
                }
                if self.optimum_resolution < 2 {
                    return Err(Error::config("optimum_resolution must be >= 2"));
                }
            }
            Recipe::SynthConverge => {
                if self.dim == 0 || !(self.domain_bound > 0.0) {
                    return Err(Error::config("dim must be >= 1 and domain_bound > 0"));
                }
                if !(self.alpha > 0.0 && self.beta >= self.alpha) {
                    return Err(Error::config("need 0 < alpha <= beta"));
                }
                if !(self.region_c > 0.0 && self.region_c <= self.dim as f64) {
                    return Err(Error::config("region_c must lie in (0, dim]"));
                }
                if !(self.eps > 0.0 && self.eps0 > 0.0) {
                    return Err(Error::config("eps and eps0 must be > 0"));
                }
                if self.zo_local == 0 || !(self.zo_local_scale > 0.0) {
                    return Err(Error::config("zo_local must be >= 1 and zo_local_scale > 0"));
                }
                if !(self.step_size() <= 1.0) {
                    return Err(Error::config("step size must lie in (0, 1]"));
                }
                if !(self.restart_factor > 0.0) {
                    return Err(Error::config("restart_factor must be > 0"));
                }
            }
            Recipe::FsmTrain => {
                self.fsm().validate()?;
                self.agent(0).validate()?;
                if self.total_steps == 0 || self.eval_interval == 0 || self.eval_episodes == 0 || self.final_window == 0 {
                    return Err(Error::config(
                        "total_steps, eval_interval, eval_episodes and final_window must be >= 1",
                    ));
                }
            }
            Recipe::FsmEval | Recipe::GridDump => {
                self.fsm().validate()?;
                for &s in &self.seeds {
                    let p = self.checkpoint_path(s)?;
                    if !p.is_file() {
                        return Err(Error::config(format!("missing checkpoint {}", p.display())));
                    }
                }
                if self.recipe == Recipe::FsmEval && self.eval_episodes == 0 {
                    return Err(Error::config("eval_episodes must be >= 1"));
                }
                if self.recipe == Recipe::GridDump && self.grid_resolution < 2 {
                    return Err(Error::config("grid_resolution must be >= 2"));
                }
            }
        }
        Ok(())
    }
}

/// Parses `0,1,2` into seeds.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::config(format!("invalid seed {s:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::from_toml_str("recipe = \"zo_sim\"\n").unwrap();
        assert_eq!(c.recipe, Recipe::ZoSim);
        assert_eq!(c.ranges, vec![0.2, 0.5, 1.0, 2.0]);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_recipes_are_config_errors() {
        assert!(ExperimentConfig::from_toml_str("recipe = \"zo_sim\"\nbogus = 1\n").unwrap_err().is_config());
        assert!(ExperimentConfig::from_toml_str("recipe = \"mujoco\"\n").unwrap_err().is_config());
        assert!("mujoco".parse::<Recipe>().is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = ExperimentConfig::from_toml_str("recipe = \"fsm_train\"\nhidden = [32, 32]\nmode = \"dpg\"\n").unwrap();
        let back = ExperimentConfig::from_toml_str(&c.resolved_toml()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.config_hash(), back.config_hash());
    }

    #[test]
    fn hash_ignores_out_dir_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.out_dir = Some("elsewhere".into());
        assert_eq!(a.config_hash(), b.config_hash());
        b.gamma = 0.9;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn seed_checks() {
        let c = ExperimentConfig {
            seeds: vec![1, 1],
            ..ExperimentConfig::default()
        };
        assert!(c.validate().unwrap_err().is_config());
        assert_eq!(parse_seeds("0, 1,2").unwrap(), vec![0, 1, 2]);
        assert!(parse_seeds("0,x").is_err());
    }

    #[test]
    fn fsm_recipes_need_checkpoints() {
        let c = ExperimentConfig {
            recipe: Recipe::GridDump,
            ..ExperimentConfig::default()
        };
        assert!(c.validate().unwrap_err().is_config());
    }
}
