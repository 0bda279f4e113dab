//! Diagnostic environments: the Four-Solution-Maze and a one-step multimodal bandit.

mod bandit;
mod fsm;

pub use bandit::{bandit_eval, BanditReward, BanditSpec, Bump, OneStepBandit};
pub use fsm::{
    fsm_oracle_return, fsm_reset, fsm_step, in_reward_region, nearest_region, oracle_action, EnvState,
    FourSolutionMaze, FsmConfig, RewardTiming,
};

use crate::rng::SeededRng;
use crate::zeroth_order::ActionSpace;
use crate::Result;

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// The episode is over and the environment must be reset.
    pub done: bool,
    /// The episode ended in a true terminal state, so nothing follows it. An episode cut by
    /// a time limit is `done` but not `terminal`.
    pub terminal: bool,
}

/// A finite-horizon episodic environment with a box action space.
///
/// Instances are plain values; clone one per worker for parallel rollouts.
pub trait Env: Clone + Send {
    fn obs_dim(&self) -> usize;
    fn action_space(&self) -> &ActionSpace;
    fn horizon(&self) -> usize;
    fn reset(&mut self, rng: &mut SeededRng) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> Result<Step>;
}
