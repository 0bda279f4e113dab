//! Double-Q critics, Bellman targets and the regression step shared with the ensemble.

use super::config::TargetPolicyState;
use super::replay::Batch;
use crate::nn::{Activation, Adam, Gradients, Matrix, Mlp, OutputActivation};
use crate::rng::split_seed;
use crate::{Error, Result};

/// `Q(s_j, a_j)` for every row `j`.
pub fn q_values(critic: &Mlp, states: &Matrix, actions: &Matrix) -> Result<Vec<f64>> {
    Ok(critic.predict_batch(&states.hstack(actions)?)?.into_vec())
}

/// Scores `(state, action)` rows in bulk. Used to rank candidate actions.
pub trait CandidateScorer {
    fn score_batch(&self, states: &Matrix, actions: &Matrix) -> Result<Vec<f64>>;
}

/// `min(Q1, Q2)`.
#[derive(Debug, Clone, Copy)]
pub struct MinQ<'a>(pub &'a Mlp, pub &'a Mlp);

impl CandidateScorer for MinQ<'_> {
    fn score_batch(&self, states: &Matrix, actions: &Matrix) -> Result<Vec<f64>> {
        let input = states.hstack(actions)?;
        let q1 = self.0.predict_batch(&input)?;
        let q2 = self.1.predict_batch(&input)?;
        Ok(q1.data().iter().zip(q2.data()).map(|(a, b)| a.min(*b)).collect())
    }
}

/// Wraps a plain function of `(state, action)`.
pub struct FnScorer<F>(pub F);

impl<F: Fn(&[f64], &[f64]) -> f64> CandidateScorer for FnScorer<F> {
    fn score_batch(&self, states: &Matrix, actions: &Matrix) -> Result<Vec<f64>> {
        Ok((0..states.rows()).map(|j| (self.0)(states.row(j), actions.row(j))).collect())
    }
}

/// Critic network taking `[state, action]` and returning a scalar.
pub fn new_critic(obs_dim: usize, act_dim: usize, hidden: &[usize], activation: Activation, seed: u64) -> Result<Mlp> {
    let mut sizes = vec![obs_dim + act_dim];
    sizes.extend_from_slice(hidden);
    sizes.push(1);
    Mlp::new(&sizes, activation, OutputActivation::Identity, seed)
}

/// Two online critics, their target copies and optimizers.
#[derive(Debug, Clone)]
pub struct DoubleCritic {
    pub online: [Mlp; 2],
    pub target: [Mlp; 2],
    pub opts: [Adam; 2],
}

impl DoubleCritic {
    pub fn new(
        obs_dim: usize,
        act_dim: usize,
        hidden: &[usize],
        activation: Activation,
        lr: f64,
        seed: u64,
    ) -> Result<Self> {
        let q1 = new_critic(obs_dim, act_dim, hidden, activation, split_seed(seed, 1))?;
        let q2 = new_critic(obs_dim, act_dim, hidden, activation, split_seed(seed, 2))?;
        Ok(Self::from_nets(q1, q2, lr))
    }

    pub fn from_nets(q1: Mlp, q2: Mlp, lr: f64) -> Self {
        Self {
            opts: [Adam::new(&q1, lr), Adam::new(&q2, lr)],
            target: [q1.clone(), q2.clone()],
            online: [q1, q2],
        }
    }

    pub fn scorer(&self) -> MinQ<'_> {
        MinQ(&self.online[0], &self.online[1])
    }

    pub fn polyak(&mut self, tau: f64) -> Result<()> {
        for (t, o) in self.target.iter_mut().zip(&self.online) {
            t.polyak_update(o, tau)?;
        }
        Ok(())
    }
}

/// `y_j = r_j + (1 - done_j) * gamma * min_i Q'_i(s'_j, pi'(x_j))`, with `x_j = s'_j` or `s_j`
/// depending on `policy_state`.
pub fn critic_targets(
    batch: &Batch,
    target_critics: (&Mlp, &Mlp),
    target_policy: &Mlp,
    gamma: f64,
    policy_state: TargetPolicyState,
) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::Contract("critic targets need a nonempty batch".into()));
    }
    let policy_input = match policy_state {
        TargetPolicyState::Next => &batch.next_states,
        TargetPolicyState::Current => &batch.states,
    };
    let next_actions = target_policy.predict_batch(policy_input)?;
    let q = MinQ(target_critics.0, target_critics.1).score_batch(&batch.next_states, &next_actions)?;
    Ok(bellman(&batch.rewards, &batch.dones, gamma, &q))
}

pub(crate) fn bellman(rewards: &[f64], dones: &[bool], gamma: f64, next_values: &[f64]) -> Vec<f64> {
    rewards
        .iter()
        .zip(dones)
        .zip(next_values)
        .map(|((r, d), q)| if *d { *r } else { r + gamma * q })
        .collect()
}

/// One optimizer step on `(1/B) * sum_j w_j (y_j - Q(s_j, a_j))^2`.
///
/// Returns the pre-step loss. No step is taken when the gradient is exactly zero (all
/// weights zero, or targets already matched), so the optimizer's momentum cannot move a
/// network that has nothing to learn from this batch.
pub fn weighted_regression_step(
    critic: &mut Mlp,
    opt: &mut Adam,
    states: &Matrix,
    actions: &Matrix,
    targets: &[f64],
    weights: Option<&[f64]>,
) -> Result<f64> {
    let b = states.rows();
    if targets.len() != b || weights.is_some_and(|w| w.len() != b) {
        return Err(Error::shape("targets/weights do not match the batch size"));
    }
    let (q, cache) = critic.forward_batch(&states.hstack(actions)?)?;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(b, 1);
    for j in 0..b {
        let w = weights.map_or(1.0, |w| w[j]);
        let err = q.get(j, 0) - targets[j];
        loss += w * err * err;
        grad.set(j, 0, 2.0 * w * err / b as f64);
    }
    loss /= b as f64;
    if !loss.is_finite() {
        return Err(Error::non_finite("critic loss", &[loss]));
    }
    let (grads, _) = critic.backward_batch(&cache, &grad)?;
    step_unless_zero(critic, opt, &grads)?;
    Ok(loss)
}

pub(crate) fn step_unless_zero(net: &mut Mlp, opt: &mut Adam, grads: &Gradients) -> Result<()> {
    if grads.is_zero() {
        return Ok(());
    }
    opt.step(net, grads)
}

/// One step for each critic of the pair against shared targets. Returns the pre-step losses.
pub fn critic_update(critics: &mut DoubleCritic, batch: &Batch, targets: &[f64]) -> Result<(f64, f64)> {
    let mut losses = [0.0; 2];
    for (i, loss) in losses.iter_mut().enumerate() {
        *loss = weighted_regression_step(
            &mut critics.online[i],
            &mut critics.opts[i],
            &batch.states,
            &batch.actions,
            targets,
            None,
        )?;
    }
    Ok((losses[0], losses[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::replay::Transition;
    use crate::nn::Layer;

    fn constant_critic(v: f64, in_dim: usize) -> Mlp {
        Mlp::from_layers(
            vec![Layer {
                weight: Matrix::zeros(1, in_dim),
                bias: vec![v],
            }],
            Activation::Tanh,
            OutputActivation::Identity,
        )
        .unwrap()
    }

    fn batch(done: bool) -> Batch {
        let t = Transition {
            s: vec![0.1, 0.2],
            a: vec![0.3, -0.3],
            r: 1.0,
            s_next: vec![0.2, 0.2],
            done,
            mask: vec![1],
        };
        Batch::from_transitions([&t, &t]).unwrap()
    }

    fn policy() -> Mlp {
        Mlp::new(&[2, 4, 2], Activation::Tanh, OutputActivation::Tanh, 0).unwrap()
    }

    #[test]
    fn constant_targets() {
        let q = constant_critic(5.0, 4);
        let y = critic_targets(&batch(false), (&q, &q), &policy(), 0.9, TargetPolicyState::Next).unwrap();
        assert!(y.iter().all(|v| (v - 5.5).abs() < 1e-12));
        let y = critic_targets(&batch(true), (&q, &q), &policy(), 0.9, TargetPolicyState::Next).unwrap();
        assert_eq!(y, vec![1.0, 1.0]);
        let y = critic_targets(&batch(false), (&q, &q), &policy(), 0.0, TargetPolicyState::Next).unwrap();
        assert_eq!(y, vec![1.0, 1.0]);
    }

    #[test]
    fn min_of_pair() {
        let lo = constant_critic(2.0, 4);
        let hi = constant_critic(7.0, 4);
        let y = critic_targets(&batch(false), (&hi, &lo), &policy(), 0.5, TargetPolicyState::Current).unwrap();
        assert_eq!(y, vec![2.0, 2.0]);
    }

    #[test]
    fn matched_targets_leave_critic_unchanged() {
        let b = batch(false);
        let q = new_critic(2, 2, &[8], Activation::Tanh, 3).unwrap();
        let mut dc = DoubleCritic::from_nets(q.clone(), q.clone(), 1e-2);
        let y = q_values(&q, &b.states, &b.actions).unwrap();
        let (l1, l2) = critic_update(&mut dc, &b, &y).unwrap();
        assert_eq!((l1, l2), (0.0, 0.0));
        assert_eq!(dc.online[0].params_flat(), q.params_flat());
        assert_eq!(dc.opts[0].steps_taken(), 0);
    }

    #[test]
    fn zero_weights_take_no_step() {
        let b = batch(false);
        let mut q = new_critic(2, 2, &[8], Activation::Tanh, 3).unwrap();
        let before = q.params_flat();
        let mut opt = Adam::new(&q, 1e-2);
        let loss = weighted_regression_step(&mut q, &mut opt, &b.states, &b.actions, &[10.0, 10.0], Some(&[0.0, 0.0]))
            .unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(q.params_flat(), before);
    }
}
