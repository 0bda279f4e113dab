use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Axis-aligned box `[low, high]` of continuous actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    low: Vec<f64>,
    high: Vec<f64>,
}

impl ActionSpace {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.is_empty() {
            return Err(Error::config("action space needs at least one dimension"));
        }
        if low.len() != high.len() {
            return Err(Error::config(format!(
                "bounds have different lengths ({} vs {})",
                low.len(),
                high.len()
            )));
        }
        if low.iter().zip(&high).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::config("action space needs finite low < high in every dimension"));
        }
        Ok(Self { low, high })
    }

    /// `[-bound, bound]^dim`.
    pub fn symmetric(dim: usize, bound: f64) -> Result<Self> {
        Self::new(vec![-bound; dim], vec![bound; dim])
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn high(&self) -> &[f64] {
        &self.high
    }

    pub fn contains(&self, a: &[f64]) -> bool {
        a.len() == self.dim()
            && a.iter()
                .zip(self.low.iter().zip(&self.high))
                .all(|(v, (l, h))| (*l..=*h).contains(v))
    }

    pub fn clip(&self, a: &mut [f64]) {
        for (v, (l, h)) in a.iter_mut().zip(self.low.iter().zip(&self.high)) {
            *v = v.clamp(*l, *h);
        }
    }

    pub fn volume(&self) -> f64 {
        self.low.iter().zip(&self.high).map(|(l, h)| h - l).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.low.iter().zip(&self.high).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// One uniform draw, bounds inclusive.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(&l, &h)| rng.random_range(l..=h))
            .collect()
    }
}

/// Local/global sample counts and the local Gaussian scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_local: usize,
    pub n_global: usize,
    pub local_scale: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_local: 25,
            n_global: 25,
            local_scale: 0.1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_local + self.n_global == 0 {
            return Err(Error::config("sampler needs at least one local or global sample"));
        }
        if !(self.local_scale > 0.0) || !self.local_scale.is_finite() {
            return Err(Error::config(format!(
                "local scale must be a positive finite number, got {}",
                self.local_scale
            )));
        }
        Ok(())
    }
}

/// `n` points `a0 + sigma * e` with `e ~ N(0, I)`. Samples are not clipped.
pub fn sample_local<R: Rng + ?Sized>(
    a0: &[f64],
    sigma: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if !(sigma > 0.0) {
        return Err(Error::config(format!("local scale must be > 0, got {sigma}")));
    }
    Ok((0..n)
        .map(|_| {
            a0.iter()
                .map(|&c| {
                    let e: f64 = rng.sample(StandardNormal);
                    c + sigma * e
                })
                .collect()
        })
        .collect())
}

/// `n` i.i.d. uniform draws inside `space`.
pub fn sample_global<R: Rng + ?Sized>(space: &ActionSpace, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| space.sample_uniform(rng)).collect()
}

/// Which candidate set produced the selected action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Current,
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub action: Vec<f64>,
    pub score: f64,
    pub source: Source,
}

/// Picks the strict maximizer of `scores`, where `scores[0]` belongs to the current action,
/// the next `n_local` entries to local samples and the remainder to global samples.
///
/// Ties keep the earliest index, so the current action wins unless something is strictly
/// better. On a non-finite score, returns its index as the error.
pub fn argmax_candidates(scores: &[f64], n_local: usize) -> std::result::Result<(usize, Source), usize> {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(i);
        }
        if s > scores[best] {
            best = i;
        }
    }
    let source = match best {
        0 => Source::Current,
        i if i <= n_local => Source::Local,
        _ => Source::Global,
    };
    Ok((best, source))
}

/// Returns the best of `{a0} ∪ local ∪ global` under `score`.
pub fn select_best<F>(
    mut score: F,
    a0: &[f64],
    local: &[Vec<f64>],
    global: &[Vec<f64>],
) -> Result<Selection>
where
    F: FnMut(&[f64]) -> f64,
{
    let candidates: Vec<&[f64]> = std::iter::once(a0)
        .chain(local.iter().map(Vec::as_slice))
        .chain(global.iter().map(Vec::as_slice))
        .collect();
    let scores: Vec<f64> = candidates.iter().map(|a| score(a)).collect();
    let (i, source) = argmax_candidates(&scores, local.len())
        .map_err(|bad| Error::non_finite("score", candidates[bad]))?;
    Ok(Selection {
        action: candidates[i].to_vec(),
        score: scores[i],
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn space_validation() {
        assert!(ActionSpace::new(vec![], vec![]).is_err());
        assert!(ActionSpace::new(vec![0.0], vec![0.0]).is_err());
        assert!(ActionSpace::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let s = ActionSpace::new(vec![-1.0, 0.0], vec![1.0, 4.0]).unwrap();
        assert_eq!(s.volume(), 8.0);
        let mut a = vec![3.0, -2.0];
        s.clip(&mut a);
        assert_eq!(a, vec![1.0, 0.0]);
    }

    #[test]
    fn local_samples_collapse_onto_a0() {
        let mut rng = rng_from_seed(0);
        let a0 = [0.3, -0.7];
        let s = sample_local(&a0, 1e-300, 50, &mut rng).unwrap();
        assert!(s.iter().all(|a| a == &a0));
        assert!(sample_local(&a0, 0.1, 0, &mut rng).unwrap().is_empty());
        assert!(sample_local(&a0, 0.0, 3, &mut rng).is_err());
    }

    #[test]
    fn local_sample_mean_is_a0() {
        let mut rng = rng_from_seed(1);
        let a0 = [0.5, -2.0];
        let sigma = 0.3;
        let n = 100_000;
        let s = sample_local(&a0, sigma, n, &mut rng).unwrap();
        for d in 0..2 {
            let mean = s.iter().map(|a| a[d]).sum::<f64>() / n as f64;
            assert!((mean - a0[d]).abs() < 5.0 * sigma / (n as f64).sqrt(), "dim {d}: {mean}");
        }
    }

    #[test]
    fn global_samples_stay_in_bounds_and_are_centered() {
        let mut rng = rng_from_seed(2);
        let space = ActionSpace::symmetric(1, 1.0).unwrap();
        let s = sample_global(&space, 100_000, &mut rng);
        assert!(s.iter().all(|a| space.contains(a)));
        let mean = s.iter().map(|a| a[0]).sum::<f64>() / s.len() as f64;
        assert!(mean.abs() < 0.02, "{mean}");
        assert!(sample_global(&space, 0, &mut rng).is_empty());
    }

    #[test]
    fn select_best_quadratic() {
        let score = |a: &[f64]| -a.iter().map(|v| v * v).sum::<f64>();
        let sel = select_best(score, &[0.3], &[vec![0.5], vec![0.1]], &[vec![-2.0]]).unwrap();
        assert_eq!(sel.action, vec![0.1]);
        assert_eq!(sel.source, Source::Local);

        let sel = select_best(score, &[0.3], &[vec![0.5]], &[vec![0.1], vec![-2.0]]).unwrap();
        assert_eq!(sel.source, Source::Global);
    }

    #[test]
    fn select_best_defaults_to_current() {
        let sel = select_best(|_| 1.0, &[0.3], &[], &[]).unwrap();
        assert_eq!((sel.action, sel.source), (vec![0.3], Source::Current));
        let sel = select_best(|_| 1.0, &[0.3], &[vec![0.1]], &[vec![0.9]]).unwrap();
        assert_eq!((sel.action, sel.source), (vec![0.3], Source::Current));
    }

    #[test]
    fn select_best_rejects_nan() {
        let err = select_best(|a| if a[0] > 0.4 { f64::NAN } else { 0.0 }, &[0.3], &[vec![0.5]], &[])
            .unwrap_err();
        match err {
            Error::NonFiniteValue { point, .. } => assert_eq!(point, vec![0.5]),
            other => panic!("{other}"),
        }
    }
}
