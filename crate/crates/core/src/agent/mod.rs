//! The actor-critic agent: replay, double-Q critics with target networks, target-action
//! selection over sampled candidates, supervised policy regression, the deterministic
//! policy gradient baseline and the training loop.

mod config;
mod critic;
mod log;
mod policy;
mod replay;
mod train;

pub use config::{AgentConfig, TargetPolicyState, UpdateMode};
pub(crate) use critic::bellman;
pub use critic::{
    critic_targets, critic_update, new_critic, q_values, weighted_regression_step, CandidateScorer, DoubleCritic,
    FnScorer, MinQ,
};
pub use log::{fmt_float, EpisodeRecord, EvalRecord, TrainLog, EPISODE_COLUMNS, EVAL_COLUMNS};
pub use policy::{
    action_gradients, dpg_update, new_policy, policy_supervised_update, policy_target_actions, Policy,
    SourceFractions, TargetActions,
};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use train::{
    eval_seed, evaluate, fsm_eval_starts, run_training, Agent, Critics, EvalSchedule, EvalStats, FsmOracle,
    UpdateStats, ZeroPolicy,
};
