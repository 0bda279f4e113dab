use serde::{Deserialize, Serialize};

use crate::bootstrap_ucb::BootstrapConfig;
use crate::nn::Activation;
use crate::zeroth_order::SamplerConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Supervised regression onto the best sampled action under min(Q1, Q2).
    Zospi,
    /// Deterministic policy gradient through Q1.
    Dpg,
    /// Supervised regression onto the best sampled action under the ensemble upper bound.
    ZospiUcb,
}

impl UpdateMode {
    pub fn name(self) -> &'static str {
        match self {
            UpdateMode::Zospi => "zospi",
            UpdateMode::Dpg => "dpg",
            UpdateMode::ZospiUcb => "zospi_ucb",
        }
    }
}

impl std::str::FromStr for UpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zospi" => Ok(UpdateMode::Zospi),
            "dpg" => Ok(UpdateMode::Dpg),
            "zospi_ucb" => Ok(UpdateMode::ZospiUcb),
            other => Err(Error::config(format!(
                "unknown update mode {other:?} (expected zospi, dpg or zospi_ucb)"
            ))),
        }
    }
}

/// State at which the target policy is queried inside the double-Q Bellman target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPolicyState {
    /// `Q'(s', pi'(s'))`, the usual backup.
    #[default]
    Next,
    /// `Q'(s', pi'(s))`, evaluating the target policy at the transition's own state.
    Current,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    /// Update epochs per environment step.
    pub updates_per_step: usize,
    pub sampler: SamplerConfig,
    pub warmup_steps: usize,
    pub mode: UpdateMode,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Std of the Gaussian noise added to behavior actions.
    pub exploration_noise: f64,
    pub buffer_capacity: usize,
    pub target_policy_state: TargetPolicyState,
    /// Used only in [`UpdateMode::ZospiUcb`].
    pub bootstrap: BootstrapConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            batch_size: 256,
            updates_per_step: 1,
            sampler: SamplerConfig::default(),
            warmup_steps: 1000,
            mode: UpdateMode::Zospi,
            seed: 0,
            hidden: vec![256, 256],
            activation: Activation::Relu,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            exploration_noise: 0.1,
            buffer_capacity: 1_000_000,
            target_policy_state: TargetPolicyState::Next,
            bootstrap: BootstrapConfig::default(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::config(format!("tau must lie in (0, 1], got {}", self.tau)));
        }
        if self.batch_size == 0 || self.updates_per_step == 0 {
            return Err(Error::config("batch size and updates per step must be >= 1"));
        }
        if self.warmup_steps < self.batch_size {
            return Err(Error::config(format!(
                "warmup ({}) must be at least the batch size ({})",
                self.warmup_steps, self.batch_size
            )));
        }
        if self.buffer_capacity < self.batch_size {
            return Err(Error::config("replay capacity must be at least the batch size"));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::config("hidden layer sizes must be a nonempty list of positive counts"));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err(Error::config("learning rates must be > 0"));
        }
        if !(self.exploration_noise >= 0.0 && self.exploration_noise.is_finite()) {
            return Err(Error::config("exploration noise must be a finite number >= 0"));
        }
        if self.mode != UpdateMode::Dpg {
            self.sampler.validate()?;
        }
        if self.mode == UpdateMode::ZospiUcb {
            self.bootstrap.validate()?;
            if self.bootstrap.local_candidates {
                self.sampler.validate()?;
            } else if self.sampler.n_global == 0 {
                return Err(Error::config("upper-bound selection samples globally; n_global must be >= 1"));
            }
        }
        Ok(())
    }
}
