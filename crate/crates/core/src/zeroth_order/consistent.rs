//! Restart-based zeroth-order optimization with consistent local iteration.
//!
//! Each restart draws a uniform starting point, then repeatedly moves a fraction `h` of the
//! way towards the best of `n_local` Gaussian perturbations of the current iterate. The
//! result is the best point seen across every restart and every intermediate iterate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling::{sample_local, ActionSpace, SamplerConfig};
use crate::{Error, Result};

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    #[default]
    Maximize,
    Minimize,
}

impl Sense {
    /// True when `a` is strictly better than `b`.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }

    /// True when `value` is at least as good as `target`.
    #[inline]
    pub fn reached(self, value: f64, target: f64) -> bool {
        match self {
            Sense::Maximize => value >= target,
            Sense::Minimize => value <= target,
        }
    }
}

/// Step size `h`, inner steps `m`, and the sampler (`n_global` is the restart count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoIterConfig {
    pub step_size: f64,
    pub inner_steps: usize,
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub sense: Sense,
    /// Stop as soon as the running best reaches this value.
    #[serde(default)]
    pub stop_at: Option<f64>,
}

impl ZoIterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::config(format!(
                "step size must lie in (0, 1], got {}",
                self.step_size
            )));
        }
        if self.inner_steps == 0 {
            return Err(Error::config("inner steps must be >= 1"));
        }
        if self.sampler.n_global == 0 {
            return Err(Error::config("consistent iteration needs at least one restart (n_global >= 1)"));
        }
        if !(self.sampler.local_scale > 0.0) {
            return Err(Error::config("local scale must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartRecord {
    pub restart: usize,
    /// Objective at the restart's final iterate.
    pub final_value: f64,
    /// Best objective seen within this restart.
    pub best_value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZoOutcome {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// Total inner iterations over all restarts.
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: Vec<RestartRecord>,
    /// `(restart index, total iterations so far)` when `stop_at` was reached.
    pub stopped_at: Option<(usize, usize)>,
}

pub fn zo_consistent_iterate<F, R>(
    mut f: F,
    space: &ActionSpace,
    cfg: &ZoIterConfig,
    rng: &mut R,
) -> Result<ZoOutcome>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let sense = cfg.sense;
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> Result<f64> {
        *evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_finite("objective", x))
        }
    };

    let mut best_point = Vec::new();
    let mut best_value = match sense {
        Sense::Maximize => f64::NEG_INFINITY,
        Sense::Minimize => f64::INFINITY,
    };
    let mut iterations = 0usize;
    let mut restarts = Vec::with_capacity(cfg.sampler.n_global);
    let mut stopped_at = None;

    'restarts: for t in 0..cfg.sampler.n_global {
        let mut x = space.sample_uniform(rng);
        let mut value = eval(&x, &mut evaluations)?;
        let mut restart_best = value;
        if best_point.is_empty() || sense.better(value, best_value) {
            best_point = x.clone();
            best_value = value;
        }
        let mut record = RestartRecord {
            restart: t,
            final_value: value,
            best_value: restart_best,
            iterations: 0,
        };
        if let Some(target) = cfg.stop_at {
            if sense.reached(best_value, target) {
                stopped_at = Some((t, iterations));
                restarts.push(record);
                break 'restarts;
            }
        }
        if cfg.sampler.n_local > 0 {
            for _ in 0..cfg.inner_steps {
                let mut samples = sample_local(&x, cfg.sampler.local_scale, cfg.sampler.n_local, rng)?;
                let mut pick = 0;
                let mut pick_value = 0.0;
                for (j, s) in samples.iter_mut().enumerate() {
                    space.clip(s);
                    let v = eval(s, &mut evaluations)?;
                    if j == 0 || sense.better(v, pick_value) {
                        pick = j;
                        pick_value = v;
                    }
                }
                for (xi, si) in x.iter_mut().zip(&samples[pick]) {
                    *xi += cfg.step_size * (si - *xi);
                }
                value = eval(&x, &mut evaluations)?;
                iterations += 1;
                record.iterations += 1;
                if sense.better(value, restart_best) {
                    restart_best = value;
                }
                if sense.better(value, best_value) {
                    best_value = value;
                    best_point.clone_from(&x);
                }
                if let Some(target) = cfg.stop_at {
                    if sense.reached(best_value, target) {
                        record.final_value = value;
                        record.best_value = restart_best;
                        stopped_at = Some((t, iterations));
                        restarts.push(record);
                        break 'restarts;
                    }
                }
            }
        }
        record.final_value = value;
        record.best_value = restart_best;
        restarts.push(record);
    }

    Ok(ZoOutcome {
        best_point,
        best_value,
        iterations,
        evaluations,
        restarts,
        stopped_at,
    })
}
