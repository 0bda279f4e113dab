//! Bootstrapped critic ensembles scored by an upper confidence bound.
//!
//! `Q+(s, a) = mean_k Q_k(s, a) + phi * std_k Q_k(s, a)` with the population standard
//! deviation over the `K` members. Each member regresses onto its own target
//! `r + gamma * max_i Q'_k(s', a_i)` over uniformly sampled actions `a_i`, using its own
//! target network and its own random stream, optionally weighted by bootstrap masks.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::agent::{bellman, new_critic, weighted_regression_step, Batch, CandidateScorer};
use crate::nn::{Activation, Adam, Matrix, Mlp};
use crate::rng::{split_seed, SeededRng};
use crate::zeroth_order::{argmax_candidates, ActionSpace, Selection};
use crate::{Error, Result};

/// How each new transition is weighted for each ensemble member.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaskScheme {
    #[default]
    AllOnes,
    /// Weight 1 with probability `p`, else 0.
    Bernoulli { p: f64 },
    /// Weight drawn from Poisson(1).
    Poisson,
}

impl MaskScheme {
    pub fn validate(&self) -> Result<()> {
        if let MaskScheme::Bernoulli { p } = self {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::config(format!("bernoulli mask probability must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Vec<u8> {
        match *self {
            MaskScheme::AllOnes => vec![1; k],
            MaskScheme::Bernoulli { p } => (0..k).map(|_| rng.random_bool(p) as u8).collect(),
            MaskScheme::Poisson => {
                let dist = Poisson::new(1.0).expect("rate 1 is valid");
                (0..k).map(|_| { let v: f64 = dist.sample(rng); v.min(255.0) as u8 }).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub ensemble_size: usize,
    /// Weight on the ensemble standard deviation.
    pub ucb_coef: f64,
    /// Uniform actions per next state when forming targets.
    pub n_target: usize,
    pub mask: MaskScheme,
    /// Also score local perturbations of the policy action, not only global samples.
    pub local_candidates: bool,
    /// Score candidates with the target ensemble instead of the online one.
    pub score_with_target: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 4,
            ucb_coef: 1.0,
            n_target: 50,
            mask: MaskScheme::AllOnes,
            local_candidates: false,
            score_with_target: false,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size < 2 {
            return Err(Error::config("ensemble needs at least two members"));
        }
        if !(self.ucb_coef >= 0.0 && self.ucb_coef.is_finite()) {
            return Err(Error::config("ucb coefficient must be a finite number >= 0"));
        }
        if self.n_target == 0 {
            return Err(Error::config("n_target must be >= 1"));
        }
        self.mask.validate()
    }
}

/// `K` online critics, their target copies and optimizers.
#[derive(Debug, Clone)]
pub struct CriticEnsemble {
    online: Vec<Mlp>,
    target: Vec<Mlp>,
    opts: Vec<Adam>,
}

impl CriticEnsemble {
    /// Members are initialized from independent child seeds of `seed`.
    pub fn new(
        obs_dim: usize,
        act_dim: usize,
        hidden: &[usize],
        activation: Activation,
        lr: f64,
        size: usize,
        seed: u64,
    ) -> Result<Self> {
        let members = (0..size)
            .map(|k| new_critic(obs_dim, act_dim, hidden, activation, split_seed(seed, 100 + k as u64)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_members(members, lr)
    }

    pub fn from_members(members: Vec<Mlp>, lr: f64) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::config("ensemble needs at least two members"));
        }
        if members.iter().any(|m| !m.same_shape(&members[0]) || m.output_dim() != 1) {
            return Err(Error::shape("ensemble members must share one scalar-output shape"));
        }
        Ok(Self {
            opts: members.iter().map(|m| Adam::new(m, lr)).collect(),
            target: members.clone(),
            online: members,
        })
    }

    pub fn len(&self) -> usize {
        self.online.len()
    }

    pub fn is_empty(&self) -> bool {
        self.online.is_empty()
    }

    pub fn online(&self) -> &[Mlp] {
        &self.online
    }

    pub fn targets(&self) -> &[Mlp] {
        &self.target
    }

    /// Mutable access to one target network, e.g. to perturb it in isolation.
    pub fn target_mut(&mut self, k: usize) -> &mut Mlp {
        &mut self.target[k]
    }

    pub fn polyak(&mut self, tau: f64) -> Result<()> {
        for (t, o) in self.target.iter_mut().zip(&self.online) {
            t.polyak_update(o, tau)?;
        }
        Ok(())
    }

    /// `values[k][j] = Q_k(s_j, a_j)`.
    pub fn member_values(&self, states: &Matrix, actions: &Matrix, use_target: bool) -> Result<Vec<Vec<f64>>> {
        let input = states.hstack(actions)?;
        let nets = if use_target { &self.target } else { &self.online };
        nets.iter().map(|n| Ok(n.predict_batch(&input)?.into_vec())).collect()
    }

    /// Mean over rows of the population std across members.
    pub fn mean_std(&self, states: &Matrix, actions: &Matrix) -> Result<f64> {
        let v = self.member_values(states, actions, false)?;
        let rows = states.rows();
        let mut col = vec![0.0; self.len()];
        let mut total = 0.0;
        for j in 0..rows {
            for (c, m) in col.iter_mut().zip(&v) {
                *c = m[j];
            }
            total += mean_and_std(&col).1;
        }
        Ok(total / rows.max(1) as f64)
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
    (mean, var.sqrt())
}

/// `mean + phi * std` of member values, with the population (1/K) standard deviation.
pub fn ucb_from_values(values: &[f64], phi: f64) -> f64 {
    let (mean, std) = mean_and_std(values);
    mean + phi * std
}

pub fn ucb_value(ensemble: &CriticEnsemble, s: &[f64], a: &[f64], phi: f64) -> Result<f64> {
    let v = ensemble.member_values(&Matrix::row_vector(s), &Matrix::row_vector(a), false)?;
    let values: Vec<f64> = v.iter().map(|m| m[0]).collect();
    Ok(ucb_from_values(&values, phi))
}

/// Candidate scorer returning the upper bound.
#[derive(Debug, Clone, Copy)]
pub struct UcbScorer<'a> {
    pub ensemble: &'a CriticEnsemble,
    pub phi: f64,
    pub use_target: bool,
}

impl CandidateScorer for UcbScorer<'_> {
    fn score_batch(&self, states: &Matrix, actions: &Matrix) -> Result<Vec<f64>> {
        let v = self.ensemble.member_values(states, actions, self.use_target)?;
        let mut col = vec![0.0; v.len()];
        Ok((0..states.rows())
            .map(|j| {
                for (c, m) in col.iter_mut().zip(&v) {
                    *c = m[j];
                }
                ucb_from_values(&col, self.phi)
            })
            .collect())
    }
}

/// Best of `{a0} ∪ local ∪ global` under the upper bound at state `s`.
pub fn ucb_select_action(
    ensemble: &CriticEnsemble,
    s: &[f64],
    a0: &[f64],
    local: &[Vec<f64>],
    global: &[Vec<f64>],
    phi: f64,
) -> Result<Selection> {
    let candidates: Vec<&[f64]> = std::iter::once(a0)
        .chain(local.iter().map(Vec::as_slice))
        .chain(global.iter().map(Vec::as_slice))
        .collect();
    let states = Matrix::from_rows(&vec![s; candidates.len()])?;
    let actions = Matrix::from_rows(&candidates)?;
    let scores = UcbScorer {
        ensemble,
        phi,
        use_target: false,
    }
    .score_batch(&states, &actions)?;
    let (i, source) =
        argmax_candidates(&scores, local.len()).map_err(|bad| Error::non_finite("ucb score", candidates[bad]))?;
    Ok(Selection {
        action: candidates[i].to_vec(),
        score: scores[i],
        source,
    })
}

/// Per-member targets `y_kj = r_j + (1 - done_j) * gamma * max_i Q'_k(s'_j, a_i)`.
///
/// Member `k` draws its uniform actions from `rngs[k]` and evaluates them with its own
/// target network only.
pub fn bootstrap_targets(
    ensemble: &CriticEnsemble,
    batch: &Batch,
    gamma: f64,
    n_target: usize,
    space: &ActionSpace,
    rngs: &mut [SeededRng],
) -> Result<Vec<Vec<f64>>> {
    if n_target == 0 {
        return Err(Error::config("n_target must be >= 1"));
    }
    if rngs.len() != ensemble.len() {
        return Err(Error::shape("one random stream per ensemble member is required"));
    }
    let b = batch.len();
    let obs_dim = batch.next_states.cols();
    let mut states = Matrix::zeros(b * n_target, obs_dim);
    for j in 0..b {
        for i in 0..n_target {
            states.row_mut(j * n_target + i).copy_from_slice(batch.next_states.row(j));
        }
    }
    let mut out = Vec::with_capacity(ensemble.len());
    for (net, rng) in ensemble.target.iter().zip(rngs.iter_mut()) {
        let mut actions = Matrix::zeros(b * n_target, space.dim());
        for r in 0..b * n_target {
            for (c, (l, h)) in space.low().iter().zip(space.high()).enumerate() {
                actions.set(r, c, rng.random_range(*l..=*h));
            }
        }
        let q = net.predict_batch(&states.hstack(&actions)?)?.into_vec();
        let best: Vec<f64> = q
            .chunks(n_target)
            .map(|c| c.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        out.push(bellman(&batch.rewards, &batch.dones, gamma, &best));
    }
    Ok(out)
}

/// One step per member on `(1/B) * sum_j m_jk (y_kj - Q_k(s_j, a_j))^2`. Members whose
/// weights are all zero in this batch are left untouched. Returns the pre-step losses.
pub fn masked_critic_update(ensemble: &mut CriticEnsemble, batch: &Batch, targets: &[Vec<f64>]) -> Result<Vec<f64>> {
    if targets.len() != ensemble.len() {
        return Err(Error::shape("one target vector per ensemble member is required"));
    }
    let mut losses = Vec::with_capacity(ensemble.len());
    for k in 0..ensemble.len() {
        let w = batch.mask_column(k);
        let loss = weighted_regression_step(
            &mut ensemble.online[k],
            &mut ensemble.opts[k],
            &batch.states,
            &batch.actions,
            &targets[k],
            Some(&w),
        )?;
        losses.push(loss);
    }
    Ok(losses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::Transition;
    use crate::rng::{rng_from_seed, stream_rng};

    fn ensemble(k: usize) -> CriticEnsemble {
        CriticEnsemble::new(2, 1, &[8], Activation::Tanh, 1e-2, k, 3).unwrap()
    }

    fn batch(masks: &[Vec<u8>]) -> Batch {
        let ts: Vec<Transition> = masks
            .iter()
            .enumerate()
            .map(|(i, m)| Transition {
                s: vec![0.1 * i as f64, 0.2],
                a: vec![0.3 - 0.2 * i as f64],
                r: 1.0 + i as f64,
                s_next: vec![0.2, 0.1 * i as f64],
                done: false,
                mask: m.clone(),
            })
            .collect();
        Batch::from_transitions(&ts).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(ucb_from_values(&[1.0, 3.0], 1.0), 3.0);
        assert_eq!(ucb_from_values(&[2.5, 2.5, 2.5], 7.0), 2.5);
        assert_eq!(ucb_from_values(&[1.0, 2.0, 6.0], 0.0), 3.0);
    }

    #[test]
    fn validation() {
        let mut c = BootstrapConfig::default();
        c.validate().unwrap();
        c.ensemble_size = 1;
        assert!(c.validate().is_err());
        let c = BootstrapConfig {
            mask: MaskScheme::Bernoulli { p: 1.5 },
            ..BootstrapConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_candidates_return_a0() {
        let e = ensemble(3);
        let sel = ucb_select_action(&e, &[0.1, 0.2], &[0.4], &[], &[], 1.0).unwrap();
        assert_eq!(sel.action, vec![0.4]);
    }

    #[test]
    fn zero_discount_targets_equal_rewards() {
        let e = ensemble(3);
        let b = batch(&[vec![1, 1, 1], vec![1, 1, 1]]);
        let space = ActionSpace::symmetric(1, 1.0).unwrap();
        let mut rngs: Vec<_> = (0..3).map(|k| stream_rng(0, 1000 + k)).collect();
        let y = bootstrap_targets(&e, &b, 0.0, 5, &space, &mut rngs).unwrap();
        assert!(y.iter().all(|v| v == &b.rewards));
    }

    #[test]
    fn masked_out_member_is_unchanged() {
        let mut e = ensemble(3);
        let before = e.online()[1].params_flat();
        let b = batch(&[vec![1, 0, 2], vec![1, 0, 0]]);
        let targets = vec![vec![5.0, 6.0]; 3];
        masked_critic_update(&mut e, &b, &targets).unwrap();
        assert_eq!(e.online()[1].params_flat(), before);
        assert_ne!(e.online()[0].params_flat(), before);
    }

    #[test]
    fn mask_schemes() {
        let mut rng = rng_from_seed(0);
        assert_eq!(MaskScheme::AllOnes.sample(4, &mut rng), vec![1; 4]);
        let m: Vec<u8> = (0..1000).flat_map(|_| MaskScheme::Bernoulli { p: 0.5 }.sample(4, &mut rng)).collect();
        assert!(m.iter().all(|&x| x <= 1));
        let mean = m.iter().map(|&x| x as f64).sum::<f64>() / m.len() as f64;
        assert!((mean - 0.5).abs() < 0.05);
        let m: Vec<u8> = (0..1000).flat_map(|_| MaskScheme::Poisson.sample(4, &mut rng)).collect();
        let mean = m.iter().map(|&x| x as f64).sum::<f64>() / m.len() as f64;
        assert!((mean - 1.0).abs() < 0.1);
    }
}
