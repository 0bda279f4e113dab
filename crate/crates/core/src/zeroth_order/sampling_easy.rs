//! Synthetic "sampling-easy" objectives for minimization.
//!
//! Inside the box region `D` the function is the anisotropic quadratic
//! `F* + ½ Σ λ_i (x_i − x*_i)²` with curvatures spread linearly from `α` to `β`, so it is
//! `α`-strongly convex and `β`-smooth there. Outside `D` it equals the quadratic at the
//! projection onto `D` plus a seeded sum of cosine ridges that fades in with the distance to
//! `D`. The function is therefore continuous, and everything outside `D` sits at least
//! `min_{∂D} q ≥ ε0` above the optimum.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::sampling::ActionSpace;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingEasySpec {
    /// Search domain `X`.
    pub domain: ActionSpace,
    /// Strongly convex region `D ⊂ X`.
    pub region: ActionSpace,
    pub minimizer: Vec<f64>,
    pub min_value: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Required gap between the optimum and every point outside `D`.
    pub eps0: f64,
    /// Volume constant: `|D| / |X| >= c / d`.
    pub c: f64,
    /// Height of the cosine ridges outside `D`.
    pub rugged_amplitude: f64,
    pub rugged_terms: usize,
}

impl SamplingEasySpec {
    /// Places a region of volume `c/d · |X|` (same aspect ratio as `X`) uniformly inside the
    /// domain, with the minimizer at its center.
    pub fn random_region(
        domain: ActionSpace,
        c: f64,
        alpha: f64,
        beta: f64,
        eps0: f64,
        seed: u64,
    ) -> Result<Self> {
        let d = domain.dim();
        let ratio = c / d as f64;
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::config(format!("c/d must lie in (0, 1], got {ratio}")));
        }
        let shrink = ratio.powf(1.0 / d as f64);
        let mut rng = rng_from_seed(seed);
        let mut low = Vec::with_capacity(d);
        let mut high = Vec::with_capacity(d);
        for (&l, &h) in domain.low().iter().zip(domain.high()) {
            let side = (h - l) * shrink;
            let slack = (h - l) - side;
            let start = if slack > 0.0 { l + rng.random_range(0.0..=slack) } else { l };
            low.push(start);
            high.push((start + side).min(h));
        }
        let region = ActionSpace::new(low, high)?;
        let minimizer = region.center();
        let spec = Self {
            domain,
            region,
            minimizer,
            min_value: 0.0,
            alpha,
            beta,
            eps0,
            c,
            rugged_amplitude: 1.0,
            rugged_terms: 8,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Curvature along each axis, `α` on the first axis up to `β` on the last.
    pub fn curvatures(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                if d == 1 {
                    self.alpha
                } else {
                    self.alpha + (self.beta - self.alpha) * i as f64 / (d - 1) as f64
                }
            })
            .collect()
    }

    /// Smallest value of the quadratic part on the boundary of `D`, above the optimum.
    pub fn boundary_gap(&self) -> f64 {
        self.curvatures()
            .iter()
            .zip(&self.minimizer)
            .zip(self.region.low().iter().zip(self.region.high()))
            .map(|((lam, x), (l, h))| {
                let w = (x - l).min(h - x);
                0.5 * lam * w * w
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_{x ∈ D} ‖x − x*‖²`.
    pub fn max_sq_radius(&self) -> f64 {
        self.minimizer
            .iter()
            .zip(self.region.low().iter().zip(self.region.high()))
            .map(|(x, (l, h))| (x - l).abs().max((h - x).abs()).powi(2))
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.region.dim() != d || self.minimizer.len() != d {
            return Err(Error::config("domain, region and minimizer dimensions differ"));
        }
        if !(self.alpha > 0.0) || !(self.beta >= self.alpha) {
            return Err(Error::config(format!(
                "need 0 < alpha <= beta, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        if !(self.eps0 > 0.0) || !(self.c > 0.0) {
            return Err(Error::config("eps0 and c must be positive"));
        }
        let inside = self
            .region
            .low()
            .iter()
            .zip(self.region.high())
            .zip(self.domain.low().iter().zip(self.domain.high()))
            .all(|((rl, rh), (dl, dh))| rl >= dl && rh <= dh);
        if !inside {
            return Err(Error::config("region D must lie inside the domain X"));
        }
        if !self.region.contains(&self.minimizer) {
            return Err(Error::config("minimizer must lie inside region D"));
        }
        let ratio = self.region.volume() / self.domain.volume();
        if ratio < (self.c / d as f64) * (1.0 - 1e-9) {
            return Err(Error::config(format!(
                "|D|/|X| = {ratio} is below c/d = {}",
                self.c / d as f64
            )));
        }
        let gap = self.boundary_gap();
        if gap < self.eps0 {
            return Err(Error::config(format!(
                "the quadratic only rises {gap} above the optimum on the boundary of D, \
                 which cannot guarantee the outside gap eps0 = {}",
                self.eps0
            )));
        }
        if self.rugged_amplitude < 0.0 {
            return Err(Error::config("rugged amplitude must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct CosineRidge {
    weight: f64,
    freq: Vec<f64>,
    phase: f64,
}

/// A concrete sampling-easy objective (to be minimized).
#[derive(Debug, Clone)]
pub struct SamplingEasyFn {
    spec: SamplingEasySpec,
    curvatures: Vec<f64>,
    ridges: Vec<CosineRidge>,
    ramp_length: f64,
}

impl SamplingEasyFn {
    pub fn spec(&self) -> &SamplingEasySpec {
        &self.spec
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.spec.minimizer
    }

    pub fn min_value(&self) -> f64 {
        self.spec.min_value
    }

    fn quadratic(&self, x: &[f64]) -> f64 {
        0.5 * self
            .curvatures
            .iter()
            .zip(x.iter().zip(&self.spec.minimizer))
            .map(|(lam, (xi, si))| lam * (xi - si) * (xi - si))
            .sum::<f64>()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let region = &self.spec.region;
        if region.contains(x) {
            return self.spec.min_value + self.quadratic(x);
        }
        let mut p = x.to_vec();
        region.clip(&mut p);
        let dist = x
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let rugged: f64 = self
            .ridges
            .iter()
            .map(|r| {
                let arg: f64 = r.freq.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + r.phase;
                r.weight * 0.5 * (1.0 - arg.cos())
            })
            .sum();
        let ramp = 1.0 - (-dist / self.ramp_length).exp();
        self.spec.min_value + self.quadratic(&p) + self.spec.rugged_amplitude * ramp * rugged
    }

    pub fn as_fn(&self) -> impl Fn(&[f64]) -> f64 + '_ {
        move |x| self.value(x)
    }
}

/// Builds the seeded objective described by `spec`.
pub fn make_sampling_easy(spec: &SamplingEasySpec, seed: u64) -> Result<SamplingEasyFn> {
    spec.validate()?;
    let d = spec.dim();
    let mut rng = rng_from_seed(seed);
    let widths: Vec<f64> = spec
        .domain
        .low()
        .iter()
        .zip(spec.domain.high())
        .map(|(l, h)| h - l)
        .collect();
    let mean_width = widths.iter().sum::<f64>() / d as f64;
    let terms = spec.rugged_terms.max(1);
    let ridges: Vec<CosineRidge> = (0..terms)
        .map(|_| {
            // random direction, 1 to 4 periods across the domain
            let dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let periods = rng.random_range(1.0..=4.0);
            let k = 2.0 * std::f64::consts::PI * periods / mean_width;
            CosineRidge {
                weight: 1.0 / terms as f64,
                freq: dir.iter().map(|v| k * v / norm).collect(),
                phase: rng.random_range(0.0..(2.0 * std::f64::consts::PI)),
            }
        })
        .collect();
    Ok(SamplingEasyFn {
        curvatures: spec.curvatures(),
        spec: spec.clone(),
        ridges,
        ramp_length: 0.05 * mean_width,
    })
}

/// Iteration budget for reaching an `eps`-optimal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceBudget {
    /// Inner steps needed once a restart lands in `D`:
    /// `⌈8(d+4)(β/α) · ln(β·D_m / (2·min(ε, ε0)))⌉`.
    pub inner_steps: usize,
    /// Expected number of uniform restarts before one lands in `D`, `d / c`.
    pub expected_restarts: f64,
}

impl ConvergenceBudget {
    pub fn for_spec(spec: &SamplingEasySpec, eps: f64) -> Self {
        let d = spec.dim() as f64;
        let e = eps.min(spec.eps0);
        let log = (spec.beta * spec.max_sq_radius() / (2.0 * e)).ln().max(1.0);
        let inner = (8.0 * (d + 4.0) * spec.beta / spec.alpha * log).ceil() as usize;
        Self {
            inner_steps: inner.max(1),
            expected_restarts: d / spec.c,
        }
    }
}
