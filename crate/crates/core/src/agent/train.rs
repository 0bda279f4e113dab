//! The actor-critic training loop and greedy evaluation.

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{AgentConfig, UpdateMode};
use super::critic::{critic_targets, critic_update, DoubleCritic};
use super::log::{EpisodeRecord, EvalRecord, TrainLog};
use super::policy::{dpg_update, new_policy, policy_supervised_update, policy_target_actions, Policy, SourceFractions};
use super::replay::{ReplayBuffer, Transition};
use crate::bootstrap_ucb::{bootstrap_targets, masked_critic_update, CriticEnsemble, UcbScorer};
use crate::envs::{fsm_reset, oracle_action, Env, FsmConfig};
use crate::nn::{Adam, Checkpoint, Mlp};
use crate::rng::{rng_from_seed, split_seed, stream_rng, streams, SeededRng};
use crate::zeroth_order::{ActionSpace, SamplerConfig};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum Critics {
    Double(DoubleCritic),
    Ensemble(CriticEnsemble),
}

/// Statistics of a single update epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStats {
    pub critic_losses: Vec<f64>,
    pub policy_loss: f64,
    pub sources: Option<SourceFractions>,
    pub ensemble_std: Option<f64>,
}

/// Policy, critics, their targets and optimizers, plus the random streams used by updates.
#[derive(Debug, Clone)]
pub struct Agent {
    cfg: AgentConfig,
    space: ActionSpace,
    policy: Mlp,
    policy_target: Mlp,
    policy_opt: Adam,
    critics: Critics,
    sampler_rng: SeededRng,
    replay_rng: SeededRng,
    target_rngs: Vec<SeededRng>,
}

impl Agent {
    pub fn new(cfg: AgentConfig, obs_dim: usize, space: ActionSpace) -> Result<Self> {
        cfg.validate()?;
        let init = split_seed(cfg.seed, streams::INIT);
        let policy = new_policy(obs_dim, &space, &cfg.hidden, cfg.activation, split_seed(init, 0))?;
        let critics = match cfg.mode {
            UpdateMode::Zospi | UpdateMode::Dpg => Critics::Double(DoubleCritic::new(
                obs_dim,
                space.dim(),
                &cfg.hidden,
                cfg.activation,
                cfg.critic_lr,
                split_seed(init, 1),
            )?),
            UpdateMode::ZospiUcb => Critics::Ensemble(CriticEnsemble::new(
                obs_dim,
                space.dim(),
                &cfg.hidden,
                cfg.activation,
                cfg.critic_lr,
                cfg.bootstrap.ensemble_size,
                split_seed(init, 2),
            )?),
        };
        let n_members = match &critics {
            Critics::Ensemble(e) => e.len(),
            Critics::Double(_) => 0,
        };
        Ok(Self {
            policy_opt: Adam::new(&policy, cfg.actor_lr),
            policy_target: policy.clone(),
            policy,
            critics,
            sampler_rng: stream_rng(cfg.seed, streams::SAMPLER),
            replay_rng: stream_rng(cfg.seed, streams::REPLAY),
            target_rngs: (0..n_members as u64)
                .map(|k| stream_rng(cfg.seed, streams::TARGET_BASE + k))
                .collect(),
            space,
            cfg,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn policy(&self) -> &Mlp {
        &self.policy
    }

    pub fn policy_target(&self) -> &Mlp {
        &self.policy_target
    }

    pub fn critics(&self) -> &Critics {
        &self.critics
    }

    /// Number of bootstrap mask entries per transition.
    pub fn mask_width(&self) -> usize {
        match &self.critics {
            Critics::Ensemble(e) => e.len(),
            Critics::Double(_) => 1,
        }
    }

    /// Critic step, policy step and target averaging on one sampled batch.
    pub fn update(&mut self, buffer: &ReplayBuffer) -> Result<UpdateStats> {
        let batch = buffer.sample(self.cfg.batch_size, &mut self.replay_rng)?;
        let cfg = &self.cfg;
        let (critic_losses, ensemble_std) = match &mut self.critics {
            Critics::Double(dc) => {
                let y = critic_targets(
                    &batch,
                    (&dc.target[0], &dc.target[1]),
                    &self.policy_target,
                    cfg.gamma,
                    cfg.target_policy_state,
                )?;
                let (l1, l2) = critic_update(dc, &batch, &y)?;
                (vec![l1, l2], None)
            }
            Critics::Ensemble(ens) => {
                let ys = bootstrap_targets(
                    ens,
                    &batch,
                    cfg.gamma,
                    cfg.bootstrap.n_target,
                    &self.space,
                    &mut self.target_rngs,
                )?;
                let losses = masked_critic_update(ens, &batch, &ys)?;
                let std = ens.mean_std(&batch.states, &batch.actions)?;
                (losses, Some(std))
            }
        };

        let (policy_loss, sources) = match (&self.critics, cfg.mode) {
            (Critics::Double(dc), UpdateMode::Dpg) => (
                dpg_update(&mut self.policy, &mut self.policy_opt, &dc.online[0], &batch.states)?,
                None,
            ),
            (Critics::Double(dc), _) => {
                let t = policy_target_actions(
                    &batch.states,
                    &self.policy,
                    &dc.scorer(),
                    &self.space,
                    &cfg.sampler,
                    &mut self.sampler_rng,
                )?;
                let loss = policy_supervised_update(&mut self.policy, &mut self.policy_opt, &batch.states, &t.actions)?;
                (loss, Some(t.fractions()))
            }
            (Critics::Ensemble(ens), _) => {
                let sampler = if cfg.bootstrap.local_candidates {
                    cfg.sampler
                } else {
                    SamplerConfig {
                        n_local: 0,
                        ..cfg.sampler
                    }
                };
                let scorer = UcbScorer {
                    ensemble: ens,
                    phi: cfg.bootstrap.ucb_coef,
                    use_target: cfg.bootstrap.score_with_target,
                };
                let t = policy_target_actions(
                    &batch.states,
                    &self.policy,
                    &scorer,
                    &self.space,
                    &sampler,
                    &mut self.sampler_rng,
                )?;
                let loss = policy_supervised_update(&mut self.policy, &mut self.policy_opt, &batch.states, &t.actions)?;
                (loss, Some(t.fractions()))
            }
        };

        self.policy_target.polyak_update(&self.policy, cfg.tau)?;
        match &mut self.critics {
            Critics::Double(dc) => dc.polyak(cfg.tau)?,
            Critics::Ensemble(ens) => ens.polyak(cfg.tau)?,
        }
        Ok(UpdateStats {
            critic_losses,
            policy_loss,
            sources,
            ensemble_std,
        })
    }

    /// All networks under stable names: `policy`, `policy_target`, and either
    /// `critic_1`, `critic_2`, `critic_target_1`, `critic_target_2` or `member_k`,
    /// `member_target_k`.
    pub fn checkpoint(&self, seed: u64) -> Checkpoint {
        let mut nets = vec![
            ("policy".to_string(), self.policy.clone()),
            ("policy_target".to_string(), self.policy_target.clone()),
        ];
        match &self.critics {
            Critics::Double(dc) => {
                for i in 0..2 {
                    nets.push((format!("critic_{}", i + 1), dc.online[i].clone()));
                }
                for i in 0..2 {
                    nets.push((format!("critic_target_{}", i + 1), dc.target[i].clone()));
                }
            }
            Critics::Ensemble(ens) => {
                for (k, m) in ens.online().iter().enumerate() {
                    nets.push((format!("member_{k}"), m.clone()));
                }
                for (k, m) in ens.targets().iter().enumerate() {
                    nets.push((format!("member_target_{k}"), m.clone()));
                }
            }
        }
        let mut ckpt = Checkpoint::new(seed, nets);
        ckpt.header
            .meta
            .insert("mode".into(), serde_json::Value::String(self.cfg.mode.name().into()));
        ckpt
    }
}

/// Evaluation cadence during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalSchedule {
    pub interval: usize,
    pub episodes: usize,
}

impl Default for EvalSchedule {
    fn default() -> Self {
        Self {
            interval: 2000,
            episodes: 10,
        }
    }
}

/// Seed of the evaluation starts for a training seed; independent of every training stream.
pub fn eval_seed(seed: u64) -> u64 {
    split_seed(seed, streams::EVAL)
}

/// Runs `total_steps` environment steps of the actor-critic loop.
///
/// Before `warmup_steps` actions are uniform and no updates happen. Afterwards the behavior
/// action is the target policy's output plus Gaussian noise, clipped to the box, and each
/// step is followed by `updates_per_step` update epochs.
pub fn run_training<E: Env>(
    cfg: &AgentConfig,
    env: &mut E,
    total_steps: usize,
    eval: Option<EvalSchedule>,
) -> Result<(TrainLog, Agent)> {
    let space = env.action_space().clone();
    let mut agent = Agent::new(cfg.clone(), env.obs_dim(), space.clone())?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity)?;
    let mut env_rng = stream_rng(cfg.seed, streams::ENV);
    let mut explore_rng = stream_rng(cfg.seed, streams::EXPLORATION);
    let mut mask_rng = stream_rng(cfg.seed, streams::MASKS);
    let mask_width = agent.mask_width();
    let n_critics = match agent.critics() {
        Critics::Double(_) => 2,
        Critics::Ensemble(e) => e.len(),
    };
    let mut log = TrainLog::new(cfg.mode, n_critics);
    let mut eval_env = env.clone();
    if let Some(s) = eval {
        if s.interval == 0 || s.episodes == 0 {
            return Err(Error::config("evaluation interval and episode count must be >= 1"));
        }
    }

    let mut acc = Accumulator::new(n_critics);
    let mut obs = env.reset(&mut env_rng);
    let mut ep_return = 0.0;
    let mut episode = 0;
    for t in 0..total_steps {
        let action = if t < cfg.warmup_steps {
            space.sample_uniform(&mut explore_rng)
        } else {
            let mut a = agent.policy_target.predict(&obs)?;
            if cfg.exploration_noise > 0.0 {
                for v in a.iter_mut() {
                    let e: f64 = explore_rng.sample(StandardNormal);
                    *v += cfg.exploration_noise * e;
                }
            }
            space.clip(&mut a);
            a
        };
        let step = env.step(&action)?;
        let mask = if mask_width > 1 {
            cfg.bootstrap.mask.sample(mask_width, &mut mask_rng)
        } else {
            vec![1]
        };
        buffer.push(Transition {
            s: obs,
            a: action,
            r: step.reward,
            s_next: step.obs.clone(),
            done: step.terminal,
            mask,
        })?;
        ep_return += step.reward;

        if t >= cfg.warmup_steps {
            for _ in 0..cfg.updates_per_step {
                acc.add(&agent.update(&buffer)?);
            }
        }

        obs = step.obs;
        if step.done {
            log.episodes.push(acc.record(t + 1, episode, ep_return));
            acc = Accumulator::new(n_critics);
            obs = env.reset(&mut env_rng);
            ep_return = 0.0;
            episode += 1;
        }
        if let Some(s) = eval {
            if (t + 1) % s.interval == 0 {
                let stats = evaluate(agent.policy(), &mut eval_env, s.episodes, eval_seed(cfg.seed))?;
                log.evals.push(EvalRecord {
                    env_step: t + 1,
                    mean_return: stats.mean,
                    std_return: stats.std,
                });
            }
        }
    }
    Ok((log, agent))
}

struct Accumulator {
    n: usize,
    critic: Vec<f64>,
    policy: f64,
    sources: Option<SourceFractions>,
    std: Option<f64>,
}

impl Accumulator {
    fn new(n_critics: usize) -> Self {
        Self {
            n: 0,
            critic: vec![0.0; n_critics],
            policy: 0.0,
            sources: None,
            std: None,
        }
    }

    fn add(&mut self, s: &UpdateStats) {
        self.n += 1;
        for (c, l) in self.critic.iter_mut().zip(&s.critic_losses) {
            *c += l;
        }
        self.policy += s.policy_loss;
        if let Some(f) = s.sources {
            let acc = self.sources.get_or_insert_with(SourceFractions::default);
            acc.local += f.local;
            acc.global += f.global;
            acc.current += f.current;
        }
        if let Some(v) = s.ensemble_std {
            *self.std.get_or_insert(0.0) += v;
        }
    }

    fn record(&self, env_step: usize, episode: usize, ret: f64) -> EpisodeRecord {
        if self.n == 0 {
            return EpisodeRecord {
                env_step,
                episode,
                ret,
                critic_losses: Vec::new(),
                policy_loss: None,
                sources: None,
                ensemble_std: None,
            };
        }
        let n = self.n as f64;
        EpisodeRecord {
            env_step,
            episode,
            ret,
            critic_losses: self.critic.iter().map(|c| c / n).collect(),
            policy_loss: Some(self.policy / n),
            sources: self.sources.map(|s| SourceFractions {
                local: s.local / n,
                global: s.global / n,
                current: s.current / n,
            }),
            ensemble_std: self.std.map(|v| v / n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalStats {
    pub mean: f64,
    /// Population standard deviation over episodes.
    pub std: f64,
    pub returns: Vec<f64>,
}

/// Greedy rollouts: `episodes` full episodes with starts drawn from `rng_from_seed(seed)`.
pub fn evaluate<P, E>(policy: &P, env: &mut E, episodes: usize, seed: u64) -> Result<EvalStats>
where
    P: Policy + ?Sized,
    E: Env,
{
    if episodes == 0 {
        return Err(Error::config("evaluation needs at least one episode"));
    }
    let mut rng = rng_from_seed(seed);
    let space = env.action_space().clone();
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut obs = env.reset(&mut rng);
        let mut total = 0.0;
        loop {
            let mut a = policy.act(&obs)?;
            space.clip(&mut a);
            let step = env.step(&a)?;
            total += step.reward;
            obs = step.obs;
            if step.done {
                break;
            }
        }
        returns.push(total);
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let std = (returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n).sqrt();
    Ok(EvalStats { mean, std, returns })
}

/// Start positions [`evaluate`] uses on the maze for a given seed.
pub fn fsm_eval_starts(cfg: &FsmConfig, episodes: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = rng_from_seed(seed);
    (0..episodes)
        .map(|_| {
            let s = fsm_reset(cfg, &mut rng);
            (s.x, s.y)
        })
        .collect()
}

/// The analytic optimal maze policy acting on scaled observations.
#[derive(Debug, Clone)]
pub struct FsmOracle {
    pub cfg: FsmConfig,
}

impl Policy for FsmOracle {
    fn act(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let (x, y) = self.cfg.unobserve(obs);
        Ok(oracle_action(&self.cfg, x, y).to_vec())
    }
}

/// The zero action everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ZeroPolicy(pub usize);

impl Policy for ZeroPolicy {
    fn act(&self, _obs: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.0])
    }
}
