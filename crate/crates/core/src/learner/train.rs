use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::credit::{td_update, CreditAssignment, CreditKind, Transition};
use super::keys::{apply_communication, CommConfig, KeyConfig, ObsKey, SharingMode, SharingPlan};
use super::qfunction::{epsilon_greedy_distribution, select_actions, QFunction};
use crate::env::{Env, Observation};
use crate::episode::{AgentRecord, EpisodeHeader, EpisodeLog, TickRecord};
use crate::metrics::ActionDistribution;
use crate::{Error, Result};

/// Offsets separating the evaluation and logging streams from training.
const EVAL_SEED_OFFSET: u64 = 0x5eed_0001;
const LOG_SEED_OFFSET: u64 = 0x5eed_0002;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: usize,
}

impl EpsilonSchedule {
    pub fn at(&self, step: usize) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        self.start + (self.end - self.start) * step as f64 / self.decay_steps as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon: EpsilonSchedule,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Environment steps between TD updates.
    pub train_every: usize,
    pub total_steps: usize,
    pub seed: u64,
    /// Reward bound; `None` takes the environment's.
    pub reward_bound: Option<f64>,
    pub eval_every: usize,
    pub eval_episodes: usize,
    /// Episodes recorded after training for the role metrics.
    pub log_episodes: usize,
    pub log_epsilon: f64,
    pub initial_q: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            alpha: 0.1,
            epsilon: EpsilonSchedule { start: 1.0, end: 0.05, decay_steps: 20_000 },
            replay_capacity: 5_000,
            batch_size: 8,
            train_every: 1,
            total_steps: 50_000,
            seed: 0,
            reward_bound: None,
            eval_every: 2_500,
            eval_episodes: 10,
            log_episodes: 5,
            log_epsilon: 0.05,
            initial_q: 0.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let e = &self.epsilon;
        let ok = (0.0..1.0).contains(&self.gamma)
            && self.alpha > 0.0
            && (0.0..=1.0).contains(&e.start)
            && (0.0..=1.0).contains(&e.end)
            && e.end <= e.start
            && self.replay_capacity > 0
            && self.batch_size > 0
            && self.batch_size <= self.replay_capacity
            && self.train_every > 0
            && self.eval_every > 0
            && (0.0..=1.0).contains(&self.log_epsilon)
            && self.reward_bound.is_none_or(|m| m > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::BadParams("training config out of range".into()))
        }
    }
}

/// One choice on each of the three strategy axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Strategy {
    pub sharing: SharingMode,
    pub credit: CreditKind,
    #[serde(default)]
    pub comm: CommConfig,
    #[serde(default = "default_weight_lr")]
    pub weight_lr: f64,
}

fn default_weight_lr() -> f64 {
    0.01
}

impl Strategy {
    /// Vdn sum, one table per agent, no communication.
    pub fn baseline() -> Self {
        Self {
            sharing: SharingMode::NoShared,
            credit: CreditKind::VdnSum,
            comm: CommConfig::default(),
            weight_lr: default_weight_lr(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.sharing.name(), if self.comm.enabled { "comm" } else { "nocomm" }, self.credit.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub eval_return: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub seed: u64,
    pub curve: Vec<CurvePoint>,
    pub q: QFunction,
    pub credit: CreditAssignment,
    pub logs: Vec<EpisodeLog>,
}

impl TrainingRun {
    pub fn final_return(&self) -> f64 {
        self.curve.last().map_or(f64::NAN, |p| p.eval_return)
    }

    /// First evaluated step whose return reaches `threshold`.
    pub fn steps_to(&self, threshold: f64) -> Option<usize> {
        self.curve.iter().find(|p| p.eval_return >= threshold).map(|p| p.step)
    }
}

/// Turns observations into per-agent keys; dead agents get `None`.
#[derive(Debug, Clone)]
pub struct KeyBuilder {
    pub features: KeyConfig,
    pub sharing: SharingPlan,
    pub comm: CommConfig,
}

impl KeyBuilder {
    pub fn new(env: &Env, features: KeyConfig, sharing: SharingMode, comm: CommConfig) -> Self {
        Self { features, sharing: SharingPlan::new(sharing, env.agent_specs()), comm }
    }

    pub fn keys(&self, obs: &[Observation]) -> Vec<Option<ObsKey>> {
        let base: Vec<ObsKey> =
            obs.iter().enumerate().map(|(i, o)| self.sharing.key(i, &self.features.features(o))).collect();
        apply_communication(obs, &base, &self.comm).into_iter().zip(obs).map(|(k, o)| o.alive.then_some(k)).collect()
    }
}

fn masks(obs: &[Observation]) -> Vec<Vec<bool>> {
    obs.iter().map(|o| o.available.clone()).collect()
}

fn unwrap_keys(keys: &[Option<ObsKey>]) -> Vec<ObsKey> {
    keys.iter().map(|k| k.clone().unwrap_or_default()).collect()
}

/// Greedy mean return over `episodes` episodes of a fresh environment.
pub fn evaluate(env: &mut Env, q: &QFunction, kb: &KeyBuilder, episodes: usize) -> Result<f64> {
    if episodes == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut total = 0.0;
    for e in 0..episodes {
        let mut obs = if e == 0 { env.observations() } else { env.reset() };
        loop {
            let keys = kb.keys(&obs);
            let joint = select_actions(q, &unwrap_keys(&keys), &masks(&obs), 0.0, &mut rng);
            let r = env.step(&joint)?;
            total += r.reward;
            let done = r.done();
            obs = r.observations;
            if done {
                break;
            }
        }
    }
    Ok(total / episodes as f64)
}

/// Rolls out `episodes` epsilon-greedy episodes and records them.
pub fn record_episodes(
    env: &mut Env,
    q: &QFunction,
    kb: &KeyBuilder,
    episodes: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Vec<EpisodeLog>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grouping = env.semantic_grouping();
    let mut logs = Vec::with_capacity(episodes);
    for e in 0..episodes {
        let mut obs = if e == 0 { env.observations() } else { env.reset() };
        let mut log = EpisodeLog::new(EpisodeHeader {
            scenario: env.name().to_string(),
            config_hash: String::new(),
            seed,
            episode: e,
            agent_count: env.agent_count(),
            vision_scope: Some(env.vision_scope()),
            semantic_groups: Some(grouping.clone()),
        });
        loop {
            let keys = kb.keys(&obs);
            let flat = unwrap_keys(&keys);
            let avail = masks(&obs);
            let joint = select_actions(q, &flat, &avail, epsilon, &mut rng);
            let positions: Vec<[f64; 2]> = env.state().agents.iter().map(|a| a.position).collect();
            let r = env.step(&joint)?;
            let agents = (0..env.agent_count())
                .map(|i| {
                    let alive = keys[i].is_some();
                    let dist = if alive {
                        epsilon_greedy_distribution(q, &flat[i], &avail[i], epsilon)
                            .map(|p| ActionDistribution::from_weights(p).expect("valid mixture"))
                    } else {
                        None
                    };
                    AgentRecord {
                        position: positions[i],
                        alive,
                        action_distribution: dist,
                        action: joint[i],
                        q_value: joint[i].map(|a| q.get(&flat[i], a)),
                    }
                })
                .collect();
            log.push(TickRecord { tick: log.len(), agents, reward: r.reward, info: r.info.clone() })?;
            let done = r.done();
            obs = r.observations;
            if done {
                break;
            }
        }
        logs.push(log);
    }
    Ok(logs)
}

/// Epsilon-greedy collection into a uniform replay buffer with periodic TD
/// updates and greedy evaluation.
pub fn train(
    factory: &dyn Fn(u64) -> Result<Env>,
    cfg: &TrainingConfig,
    strategy: &Strategy,
    features: Option<KeyConfig>,
) -> Result<TrainingRun> {
    cfg.validate()?;
    let mut env = factory(cfg.seed)?;
    let features = features.unwrap_or_else(|| KeyConfig::for_env(&env));
    let kb = KeyBuilder::new(&env, features, strategy.sharing, strategy.comm.clone());
    let bound = QFunction::value_bound(cfg.reward_bound.unwrap_or(env.reward_bound()), cfg.gamma);
    let mut q = QFunction::new(env.action_count(), cfg.initial_q, bound);
    let mut credit = CreditAssignment::new(strategy.credit, env.agent_count(), strategy.weight_lr);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut replay: Vec<Transition> = Vec::with_capacity(cfg.replay_capacity.min(1 << 16));
    let mut cursor = 0usize;
    let mut curve = Vec::new();
    let eval_seed = cfg.seed.wrapping_add(EVAL_SEED_OFFSET);
    let eval = |q: &QFunction| -> Result<f64> { evaluate(&mut factory(eval_seed)?, q, &kb, cfg.eval_episodes) };
    curve.push(CurvePoint { step: 0, eval_return: eval(&q)? });

    let mut obs = env.observations();
    let mut keys = kb.keys(&obs);
    let mut batch = Vec::with_capacity(cfg.batch_size);
    for step in 1..=cfg.total_steps {
        let eps = cfg.epsilon.at(step - 1);
        let joint = select_actions(&q, &unwrap_keys(&keys), &masks(&obs), eps, &mut rng);
        let r = env.step(&joint)?;
        let next_keys = kb.keys(&r.observations);
        let tr = Transition {
            keys: keys.clone(),
            actions: joint,
            reward: r.reward,
            next_keys: next_keys.clone(),
            next_available: masks(&r.observations),
            terminal: r.terminated,
        };
        if replay.len() < cfg.replay_capacity {
            replay.push(tr);
        } else {
            replay[cursor] = tr;
            cursor = (cursor + 1) % cfg.replay_capacity;
        }
        if r.done() {
            obs = env.reset();
            keys = kb.keys(&obs);
        } else {
            obs = r.observations;
            keys = next_keys;
        }
        if step % cfg.train_every == 0 && replay.len() >= cfg.batch_size {
            batch.clear();
            for _ in 0..cfg.batch_size {
                batch.push(replay[rng.gen_range(0..replay.len())].clone());
            }
            td_update(&mut q, &mut credit, &batch, cfg.alpha, cfg.gamma)?;
        }
        if step % cfg.eval_every == 0 || step == cfg.total_steps {
            curve.push(CurvePoint { step, eval_return: eval(&q)? });
        }
    }
    let log_seed = cfg.seed.wrapping_add(LOG_SEED_OFFSET);
    let logs = record_episodes(&mut factory(log_seed)?, &q, &kb, cfg.log_episodes, cfg.log_epsilon, cfg.seed)?;
    Ok(TrainingRun { seed: cfg.seed, curve, q, credit, logs })
}

/// Info channels averaged over a set of logs' final ticks.
pub fn final_info(logs: &[EpisodeLog]) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    let n = logs.len().max(1) as f64;
    for l in logs {
        if let Some(last) = l.records.last() {
            for (k, v) in &last.info {
                *out.entry(k.clone()).or_default() += v / n;
            }
        }
    }
    out
}
