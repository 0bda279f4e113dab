//! Policy networks and the two policy-improvement steps: supervised regression onto sampled
//! target actions, and the deterministic policy gradient baseline.

use rand::Rng;

use super::critic::{step_unless_zero, CandidateScorer};
use crate::nn::{Activation, Adam, Matrix, Mlp, OutputActivation};
use crate::zeroth_order::{argmax_candidates, sample_global, sample_local, ActionSpace, SamplerConfig, Source};
use crate::{Error, Result};

/// Anything that maps an observation to an action.
pub trait Policy {
    fn act(&self, obs: &[f64]) -> Result<Vec<f64>>;
}

impl Policy for Mlp {
    fn act(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.predict(obs)
    }
}

/// Deterministic policy network with a tanh head scaled onto the action box.
pub fn new_policy(obs_dim: usize, space: &ActionSpace, hidden: &[usize], activation: Activation, seed: u64) -> Result<Mlp> {
    let mut sizes = vec![obs_dim];
    sizes.extend_from_slice(hidden);
    sizes.push(space.dim());
    let out = OutputActivation::ScaledTanh {
        low: space.low().to_vec(),
        high: space.high().to_vec(),
    };
    Mlp::new(&sizes, activation, out, seed)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SourceFractions {
    pub local: f64,
    pub global: f64,
    pub current: f64,
}

impl SourceFractions {
    pub fn from_sources(sources: &[Source]) -> Self {
        if sources.is_empty() {
            return Self::default();
        }
        let n = sources.len() as f64;
        let count = |s: Source| sources.iter().filter(|&&x| x == s).count() as f64 / n;
        Self {
            local: count(Source::Local),
            global: count(Source::Global),
            current: count(Source::Current),
        }
    }
}

/// Per-state target actions `a+` with their provenance and scores.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetActions {
    pub actions: Matrix,
    pub sources: Vec<Source>,
    /// Score of each selected action.
    pub scores: Vec<f64>,
    /// Score of the policy's own action at each state.
    pub current_scores: Vec<f64>,
}

impl TargetActions {
    pub fn fractions(&self) -> SourceFractions {
        SourceFractions::from_sources(&self.sources)
    }
}

/// For each state: score `pi(s)`, `n_local` clipped Gaussian perturbations of it and
/// `n_global` uniform actions, and keep the best. Ties keep `pi(s)`.
pub fn policy_target_actions<S, R>(
    states: &Matrix,
    policy: &Mlp,
    scorer: &S,
    space: &ActionSpace,
    sampler: &SamplerConfig,
    rng: &mut R,
) -> Result<TargetActions>
where
    S: CandidateScorer + ?Sized,
    R: Rng + ?Sized,
{
    let a0 = policy.predict_batch(states)?;
    let b = states.rows();
    let d = space.dim();
    let per_state = 1 + sampler.n_local + sampler.n_global;
    let mut cand_states = Matrix::zeros(b * per_state, states.cols());
    let mut cand_actions = Matrix::zeros(b * per_state, d);
    for i in 0..b {
        let base = i * per_state;
        let mut row = base;
        let mut put = |a: &[f64], row: &mut usize| {
            cand_states.row_mut(*row).copy_from_slice(states.row(i));
            cand_actions.row_mut(*row).copy_from_slice(a);
            *row += 1;
        };
        put(a0.row(i), &mut row);
        if sampler.n_local > 0 {
            for mut a in sample_local(a0.row(i), sampler.local_scale, sampler.n_local, rng)? {
                space.clip(&mut a);
                put(&a, &mut row);
            }
        }
        for a in sample_global(space, sampler.n_global, rng) {
            put(&a, &mut row);
        }
    }
    let scores = scorer.score_batch(&cand_states, &cand_actions)?;
    if scores.len() != b * per_state {
        return Err(Error::shape("scorer returned the wrong number of scores"));
    }

    let mut actions = Matrix::zeros(b, d);
    let mut sources = Vec::with_capacity(b);
    let mut best_scores = Vec::with_capacity(b);
    let mut current_scores = Vec::with_capacity(b);
    for i in 0..b {
        let base = i * per_state;
        let block = &scores[base..base + per_state];
        let (k, source) = argmax_candidates(block, sampler.n_local)
            .map_err(|bad| Error::non_finite("critic score", cand_actions.row(base + bad)))?;
        actions.row_mut(i).copy_from_slice(cand_actions.row(base + k));
        sources.push(source);
        best_scores.push(block[k]);
        current_scores.push(block[0]);
    }
    Ok(TargetActions {
        actions,
        sources,
        scores: best_scores,
        current_scores,
    })
}

/// One optimizer step on `mean_j 0.5 * |a+_j - pi(s_j)|^2`. Returns the pre-step loss.
pub fn policy_supervised_update(policy: &mut Mlp, opt: &mut Adam, states: &Matrix, targets: &Matrix) -> Result<f64> {
    let (out, cache) = policy.forward_batch(states)?;
    if out.shape() != targets.shape() {
        return Err(Error::shape(format!(
            "policy outputs are {:?}, targets are {:?}",
            out.shape(),
            targets.shape()
        )));
    }
    let b = states.rows() as f64;
    let mut grad = Matrix::zeros(out.rows(), out.cols());
    let mut loss = 0.0;
    for ((g, y), t) in grad.data_mut().iter_mut().zip(out.data()).zip(targets.data()) {
        let diff = y - t;
        loss += 0.5 * diff * diff;
        *g = diff / b;
    }
    loss /= b;
    if !loss.is_finite() {
        return Err(Error::non_finite("policy loss", &[loss]));
    }
    let (grads, _) = policy.backward_batch(&cache, &grad)?;
    step_unless_zero(policy, opt, &grads)?;
    Ok(loss)
}

/// `dQ/da` at `(s_j, a_j)` for every row, from the critic's input gradient.
pub fn action_gradients(critic: &Mlp, states: &Matrix, actions: &Matrix) -> Result<Matrix> {
    let (q, cache) = critic.forward_batch(&states.hstack(actions)?)?;
    let ones = Matrix::from_vec(q.rows(), 1, vec![1.0; q.rows()])?;
    let (_, input_grad) = critic.backward_batch(&cache, &ones)?;
    Ok(input_grad.columns(states.cols(), states.cols() + actions.cols()))
}

/// One ascent step on `mean_j Q(s_j, pi(s_j))`. Returns the surrogate loss `-mean Q` before
/// the step.
pub fn dpg_update(policy: &mut Mlp, opt: &mut Adam, critic: &Mlp, states: &Matrix) -> Result<f64> {
    let (actions, cache) = policy.forward_batch(states)?;
    let (q, qcache) = critic.forward_batch(&states.hstack(&actions)?)?;
    let b = states.rows() as f64;
    let loss = -q.data().iter().sum::<f64>() / b;
    if !loss.is_finite() {
        return Err(Error::non_finite("policy loss", &[loss]));
    }
    let seed = Matrix::from_vec(q.rows(), 1, vec![-1.0 / b; q.rows()])?;
    let (_, input_grad) = critic.backward_batch(&qcache, &seed)?;
    let action_grad = input_grad.columns(states.cols(), states.cols() + actions.cols());
    let (grads, _) = policy.backward_batch(&cache, &action_grad)?;
    step_unless_zero(policy, opt, &grads)?;
    Ok(loss)
}
