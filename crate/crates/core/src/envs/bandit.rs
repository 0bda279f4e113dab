//! One-step bandit whose reward is a sum of Gaussian bumps over `[-1, 1]`.

use serde::{Deserialize, Serialize};

use super::{Env, Step};
use crate::rng::SeededRng;
use crate::zeroth_order::ActionSpace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

impl Bump {
    pub fn new(center: f64, width: f64, height: f64) -> Self {
        Self { center, width, height }
    }

    pub fn value(&self, a: f64) -> f64 {
        let z = (a - self.center) / self.width;
        self.height * (-0.5 * z * z).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditSpec {
    pub bumps: Vec<Bump>,
}

impl BanditSpec {
    /// Builds a spec and checks it is multimodal: at least two bumps with distinct heights.
    pub fn new(bumps: Vec<Bump>) -> Result<Self> {
        let spec = Self { bumps };
        spec.validate()?;
        Ok(spec)
    }

    /// Unchecked single- or equal-height specs, for unit checks of the landscape formula.
    pub fn unchecked(bumps: Vec<Bump>) -> Self {
        Self { bumps }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bumps.len() < 2 {
            return Err(Error::config("bandit needs at least two bumps"));
        }
        for b in &self.bumps {
            if !(b.width > 0.0) || !b.center.is_finite() || !b.height.is_finite() || !b.width.is_finite() {
                return Err(Error::config(format!("invalid bump {b:?}")));
            }
        }
        let h0 = self.bumps[0].height;
        if self.bumps.iter().all(|b| b.height == h0) {
            return Err(Error::config("bandit bumps need at least two distinct heights"));
        }
        Ok(())
    }

    /// Three-peak landscape: a low peak on the left, a wider middle peak and the global
    /// optimum as a narrow peak on the right.
    pub fn three_peaks() -> Self {
        Self {
            bumps: vec![
                Bump::new(-0.7, 0.12, 1.0),
                Bump::new(-0.05, 0.15, 1.5),
                Bump::new(0.7, 0.1, 2.0),
            ],
        }
    }

    pub fn domain() -> ActionSpace {
        ActionSpace::symmetric(1, 1.0).expect("static bounds")
    }

    pub fn value(&self, a: f64) -> f64 {
        self.bumps.iter().map(|b| b.value(a)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BanditReward {
    pub reward: f64,
    /// The action was outside `[-1, 1]` and got clamped before evaluation.
    pub clamped: bool,
}

pub fn bandit_eval(spec: &BanditSpec, action: f64) -> BanditReward {
    let a = action.clamp(-1.0, 1.0);
    BanditReward {
        reward: spec.value(a),
        clamped: a != action,
    }
}

/// Episodes of length one with a constant observation.
#[derive(Debug, Clone)]
pub struct OneStepBandit {
    spec: BanditSpec,
    space: ActionSpace,
    done: bool,
}

impl OneStepBandit {
    pub fn new(spec: BanditSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            space: BanditSpec::domain(),
            done: true,
        })
    }

    pub fn spec(&self) -> &BanditSpec {
        &self.spec
    }
}

impl Env for OneStepBandit {
    fn obs_dim(&self) -> usize {
        1
    }

    fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    fn horizon(&self) -> usize {
        1
    }

    fn reset(&mut self, _rng: &mut SeededRng) -> Vec<f64> {
        self.done = false;
        vec![0.0]
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        if self.done {
            return Err(Error::Contract("step called on a finished episode".into()));
        }
        if action.len() != 1 {
            return Err(Error::shape(format!("bandit actions have 1 component, got {}", action.len())));
        }
        if !action[0].is_finite() {
            return Err(Error::non_finite("action", action));
        }
        self.done = true;
        Ok(Step {
            obs: vec![0.0],
            reward: bandit_eval(&self.spec, action[0]).reward,
            done: true,
            terminal: true,
        })
    }
}
