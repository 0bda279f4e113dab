//! Success rate of sample-and-move search as a function of the sampling range.
//!
//! Each round draws `samples_per_iter` points uniformly from the L∞ ball of radius `r`
//! around the current iterate (clipped to the space) and moves to the best of those points
//! and the iterate itself. A run succeeds when its final value is within `tolerance` of the
//! known optimum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::consistent::Sense;
use super::sampling::{argmax_candidates, ActionSpace};
use crate::rng::stream_rng;
use crate::{Error, Result};

/// RNG stream used by every range of a given seed, so all ranges see the same uniform draws
/// (only scaled differently).
pub const SWEEP_STREAM: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeSweepConfig {
    pub ranges: Vec<f64>,
    pub samples_per_iter: usize,
    pub iters: usize,
    pub seeds: Vec<u64>,
    pub start: Vec<f64>,
    /// Global optimum value of the objective.
    pub optimum: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub sense: Sense,
}

impl RangeSweepConfig {
    pub fn validate(&self, space: &ActionSpace) -> Result<()> {
        if self.ranges.is_empty() || self.ranges.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::config("ranges must be a nonempty list of non-negative numbers"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("range sweep needs at least one seed"));
        }
        if !space.contains(&self.start) {
            return Err(Error::config(format!("start {:?} lies outside the space", self.start)));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::config("tolerance must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub range: f64,
    pub seed: u64,
    pub final_value: f64,
    pub success: bool,
    /// Round (1-based) of the last move; 0 if the iterate never moved.
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `(range, success fraction over seeds)` in input order.
    pub success: Vec<(f64, f64)>,
}

/// Runs one seed at one range.
pub fn sweep_once<F, R>(
    f: &F,
    space: &ActionSpace,
    range: f64,
    cfg: &RangeSweepConfig,
    rng: &mut R,
) -> Result<(f64, usize)>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let mut x = cfg.start.clone();
    let mut value = f(&x);
    let key = |v: f64| match cfg.sense {
        Sense::Maximize => v,
        Sense::Minimize => -v,
    };
    let mut last_move = 0;
    let mut candidates = Vec::with_capacity(cfg.samples_per_iter);
    let mut scores = Vec::with_capacity(cfg.samples_per_iter + 1);
    for round in 1..=cfg.iters {
        candidates.clear();
        for _ in 0..cfg.samples_per_iter {
            let mut c: Vec<f64> = x
                .iter()
                .map(|&xi| xi + range * rng.random_range(-1.0..=1.0))
                .collect();
            space.clip(&mut c);
            candidates.push(c);
        }
        scores.clear();
        scores.push(key(value));
        for c in &candidates {
            scores.push(key(f(c)));
        }
        let (best, _) = argmax_candidates(&scores, 0).map_err(|i| {
            let point = if i == 0 { &x } else { &candidates[i - 1] };
            Error::non_finite("objective", point)
        })?;
        if best > 0 {
            x = candidates.swap_remove(best - 1);
            value = f(&x);
            last_move = round;
        }
    }
    Ok((value, last_move))
}

pub fn range_sweep<F>(f: &F, space: &ActionSpace, cfg: &RangeSweepConfig) -> Result<SweepTable>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate(space)?;
    let mut rows = Vec::with_capacity(cfg.ranges.len() * cfg.seeds.len());
    let mut success = Vec::with_capacity(cfg.ranges.len());
    for &range in &cfg.ranges {
        let mut hits = 0usize;
        for &seed in &cfg.seeds {
            let mut rng = stream_rng(seed, SWEEP_STREAM);
            let (final_value, iterations) = sweep_once(f, space, range, cfg, &mut rng)?;
            let ok = match cfg.sense {
                Sense::Maximize => final_value >= cfg.optimum - cfg.tolerance,
                Sense::Minimize => final_value <= cfg.optimum + cfg.tolerance,
            };
            hits += ok as usize;
            rows.push(SweepRow {
                range,
                seed,
                final_value,
                success: ok,
                iterations,
            });
        }
        success.push((range, hits as f64 / cfg.seeds.len() as f64));
    }
    Ok(SweepTable { rows, success })
}

/// Best value of `f` over a uniform lattice with `resolution` points per axis.
pub fn dense_grid_optimum<F>(f: &F, space: &ActionSpace, resolution: usize, sense: Sense) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let d = space.dim();
    let res = resolution.max(2);
    let total = res.pow(d as u32);
    let mut best_point = space.low().to_vec();
    let mut best = f(&best_point);
    let mut x = vec![0.0; d];
    for idx in 0..total {
        let mut rem = idx;
        for k in 0..d {
            let i = rem % res;
            rem /= res;
            let (l, h) = (space.low()[k], space.high()[k]);
            x[k] = l + (h - l) * i as f64 / (res - 1) as f64;
        }
        let v = f(&x);
        if sense.better(v, best) {
            best = v;
            best_point.clone_from(&x);
        }
    }
    (best_point, best)
}
