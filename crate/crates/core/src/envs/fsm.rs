//! Four-Solution-Maze.
//!
//! An `N × N` continuous map with four unit reward squares, one flush against the midpoint
//! of each edge. The agent observes its position, moves by at most 1 per axis per step,
//! and collects `region_reward` whenever it is inside a square, `step_penalty` otherwise.
//! Episodes last exactly `2N` steps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Env, Step};
use crate::rng::SeededRng;
use crate::zeroth_order::ActionSpace;
use crate::{Error, Result};

/// Which position decides the reward of a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardTiming {
    /// The position after the move.
    #[default]
    NextPosition,
    /// The position before the move.
    CurrentPosition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsmConfig {
    pub size: usize,
    pub region_reward: f64,
    pub step_penalty: f64,
    #[serde(default)]
    pub reward_timing: RewardTiming,
}

impl Default for FsmConfig {
    fn default() -> Self {
        Self {
            size: 10,
            region_reward: 10.0,
            step_penalty: -0.01,
            reward_timing: RewardTiming::NextPosition,
        }
    }
}

impl FsmConfig {
    pub fn with_size(size: usize) -> Self {
        Self {
            size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 4 {
            return Err(Error::config(format!(
                "map size must be >= 4 so the reward squares do not overlap, got {}",
                self.size
            )));
        }
        if !self.region_reward.is_finite() || !self.step_penalty.is_finite() {
            return Err(Error::config("rewards must be finite"));
        }
        Ok(())
    }

    pub fn side(&self) -> f64 {
        self.size as f64
    }

    pub fn horizon(&self) -> usize {
        2 * self.size
    }

    /// Reward squares as `[x_lo, x_hi, y_lo, y_hi]`: bottom, top, left, right.
    pub fn regions(&self) -> [[f64; 4]; 4] {
        let n = self.side();
        let m = 0.5 * n;
        [
            [m - 0.5, m + 0.5, 0.0, 1.0],
            [m - 0.5, m + 0.5, n - 1.0, n],
            [0.0, 1.0, m - 0.5, m + 0.5],
            [n - 1.0, n, m - 0.5, m + 0.5],
        ]
    }

    pub fn region_centers(&self) -> [(f64, f64); 4] {
        self.regions()
            .map(|[xl, xh, yl, yh]| (0.5 * (xl + xh), 0.5 * (yl + yh)))
    }

    /// Observation fed to networks: the position scaled to `[0, 1]²`.
    pub fn observe(&self, x: f64, y: f64) -> [f64; 2] {
        [x / self.side(), y / self.side()]
    }

    pub fn unobserve(&self, obs: &[f64]) -> (f64, f64) {
        (obs[0] * self.side(), obs[1] * self.side())
    }

    pub fn action_space(&self) -> ActionSpace {
        ActionSpace::symmetric(2, 1.0).expect("static bounds")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState {
    pub x: f64,
    pub y: f64,
    pub t: usize,
    pub done: bool,
}

/// Uniform start on `[0, N]²`.
pub fn fsm_reset(cfg: &FsmConfig, rng: &mut impl Rng) -> EnvState {
    let n = cfg.side();
    EnvState {
        x: rng.random_range(0.0..=n),
        y: rng.random_range(0.0..=n),
        t: 0,
        done: false,
    }
}

/// Membership in any reward square, boundaries included.
pub fn in_reward_region(cfg: &FsmConfig, x: f64, y: f64) -> bool {
    cfg.regions()
        .iter()
        .any(|&[xl, xh, yl, yh]| (xl..=xh).contains(&x) && (yl..=yh).contains(&y))
}

pub fn fsm_step(cfg: &FsmConfig, state: &EnvState, action: &[f64]) -> Result<(EnvState, f64, bool)> {
    if state.done {
        return Err(Error::Contract("step called on a finished episode".into()));
    }
    if action.len() != 2 {
        return Err(Error::shape(format!("maze actions have 2 components, got {}", action.len())));
    }
    if !action.iter().all(|a| a.is_finite()) {
        return Err(Error::non_finite("action", action));
    }
    let n = cfg.side();
    let dx = action[0].clamp(-1.0, 1.0);
    let dy = action[1].clamp(-1.0, 1.0);
    let nx = (state.x + dx).clamp(0.0, n);
    let ny = (state.y + dy).clamp(0.0, n);
    let scored = match cfg.reward_timing {
        RewardTiming::NextPosition => in_reward_region(cfg, nx, ny),
        RewardTiming::CurrentPosition => in_reward_region(cfg, state.x, state.y),
    };
    let reward = if scored { cfg.region_reward } else { cfg.step_penalty };
    let t = state.t + 1;
    let done = t >= cfg.horizon();
    Ok((EnvState { x: nx, y: ny, t, done }, reward, done))
}

fn linf_to_square(x: f64, y: f64, sq: &[f64; 4]) -> f64 {
    let [xl, xh, yl, yh] = *sq;
    let dx = (xl - x).max(x - xh).max(0.0);
    let dy = (yl - y).max(y - yh).max(0.0);
    dx.max(dy)
}

/// Index of the reward square closest to `(x, y)` in L∞ distance, and that distance.
pub fn nearest_region(cfg: &FsmConfig, x: f64, y: f64) -> (usize, f64) {
    cfg.regions()
        .iter()
        .enumerate()
        .map(|(i, sq)| (i, linf_to_square(x, y, sq)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Action of the analytic optimal policy: head for the nearest point of the nearest square
/// at full speed, then stand still.
///
/// The aim point sits `1e-9` inside the square so floating-point rounding of the move
/// cannot leave the agent on the wrong side of a boundary.
pub fn oracle_action(cfg: &FsmConfig, x: f64, y: f64) -> [f64; 2] {
    const MARGIN: f64 = 1e-9;
    let (i, _) = nearest_region(cfg, x, y);
    let [xl, xh, yl, yh] = cfg.regions()[i];
    let tx = x.clamp(xl + MARGIN, xh - MARGIN);
    let ty = y.clamp(yl + MARGIN, yh - MARGIN);
    [(tx - x).clamp(-1.0, 1.0), (ty - y).clamp(-1.0, 1.0)]
}

/// Undiscounted return of the optimal policy from `start` over the full horizon.
pub fn fsm_oracle_return(cfg: &FsmConfig, x: f64, y: f64) -> f64 {
    let horizon = cfg.horizon();
    let (_, dist) = nearest_region(cfg, x, y);
    let steps_to_enter = dist.ceil() as usize;
    let outside = match cfg.reward_timing {
        RewardTiming::NextPosition => steps_to_enter.saturating_sub(1),
        RewardTiming::CurrentPosition => steps_to_enter,
    }
    .min(horizon);
    outside as f64 * cfg.step_penalty + (horizon - outside) as f64 * cfg.region_reward
}

/// The maze as an [`Env`] with observations scaled to `[0, 1]²`.
#[derive(Debug, Clone)]
pub struct FourSolutionMaze {
    cfg: FsmConfig,
    space: ActionSpace,
    state: EnvState,
}

impl FourSolutionMaze {
    pub fn new(cfg: FsmConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            space: cfg.action_space(),
            state: EnvState {
                x: 0.0,
                y: 0.0,
                t: 0,
                done: true,
            },
            cfg,
        })
    }

    pub fn config(&self) -> &FsmConfig {
        &self.cfg
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    /// Starts an episode at a chosen position.
    pub fn reset_to(&mut self, x: f64, y: f64) -> Vec<f64> {
        self.state = EnvState { x, y, t: 0, done: false };
        self.cfg.observe(x, y).to_vec()
    }
}

impl Env for FourSolutionMaze {
    fn obs_dim(&self) -> usize {
        2
    }

    fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    fn horizon(&self) -> usize {
        self.cfg.horizon()
    }

    fn reset(&mut self, rng: &mut SeededRng) -> Vec<f64> {
        self.state = fsm_reset(&self.cfg, rng);
        self.cfg.observe(self.state.x, self.state.y).to_vec()
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        let (next, reward, done) = fsm_step(&self.cfg, &self.state, action)?;
        self.state = next;
        Ok(Step {
            obs: self.cfg.observe(next.x, next.y).to_vec(),
            reward,
            done,
            terminal: false,
        })
    }
}
