//! Seedable cooperative grid worlds with circular partial observability.
//!
//! Positions are continuous coordinates; units move on the integer lattice
//! by `move_speed` per step and every observation is filtered by the
//! observer's vision disk.

mod params;
mod units;

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use params::{Assignment, BattleParams, LandmarkLayout, ScenarioConfig, SpreadParams, SpreadReward, StartLayout};
pub use units::{AgentSpec, UnitStats, UnitTable, UnitType};

use crate::metrics::SemanticGrouping;
use crate::{Error, Result};

/// Per-agent action: `None` for dead agents, `Some(index)` otherwise.
pub type JointAction = [Option<usize>];

pub const STAY: usize = 0;
pub const MOVE_DIRS: [[f64; 2]; 5] = [[0.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0]];
/// Number of attack and heal target slots in the battle action set.
pub const TARGET_SLOTS: usize = 2;
pub const ATTACK_BASE: usize = 5;
pub const HEAL_BASE: usize = ATTACK_BASE + TARGET_SLOTS;
pub const BATTLE_ACTIONS: usize = HEAL_BASE + TARGET_SLOTS;
pub const SPREAD_ACTIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Ally,
    Enemy,
    Landmark,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitState {
    pub position: [f64; 2],
    pub health: f64,
    pub alive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityState {
    pub kind: EntityKind,
    pub position: [f64; 2],
    pub health: f64,
    pub max_health: f64,
    pub alive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub tick: usize,
    pub agents: Vec<UnitState>,
    /// Landmarks or enemy units.
    pub entities: Vec<EntityState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleEntity {
    pub kind: EntityKind,
    /// Index among agents (for allies) or among scenario entities.
    pub index: usize,
    pub rel: [f64; 2],
    pub distance: f64,
    /// Health as a fraction of maximum health.
    pub health: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub observer_id: usize,
    pub alive: bool,
    pub position: [f64; 2],
    pub health: f64,
    pub unit_type: UnitType,
    /// Entities inside the vision disk, nearest first.
    pub visible: Vec<VisibleEntity>,
    /// Mask over the action set; all false for dead agents.
    pub available: Vec<bool>,
}

impl Observation {
    pub fn nearest(&self, kind: EntityKind) -> Option<&VisibleEntity> {
        self.visible.iter().find(|e| e.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observations: Vec<Observation>,
    pub reward: f64,
    pub terminated: bool,
    /// Horizon reached without termination.
    pub truncated: bool,
    pub info: BTreeMap<String, f64>,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// A single environment instance.
#[derive(Debug, Clone)]
pub struct Env {
    config: ScenarioConfig,
    specs: Vec<AgentSpec>,
    enemy: Option<UnitStats>,
    vision_scope: f64,
    state: WorldState,
    landmarks: Vec<[f64; 2]>,
    rng: ChaCha8Rng,
    seed: u64,
    episode: u64,
}

/// Builds an environment from a scenario name and JSON parameters.
pub fn make_scenario(name: &str, params: serde_json::Value, seed: u64) -> Result<Env> {
    Env::new(ScenarioConfig::from_parts(name, params)?, seed)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Env {
    pub fn new(config: ScenarioConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(seed);
        let (specs, enemy, vision_scope) = match &config {
            ScenarioConfig::Spread(p) | ScenarioConfig::DoubleSpread(p) => {
                let stats = UnitTable::default().get(UnitType::Mover)?;
                let specs = (0..p.agents)
                    .map(|i| AgentSpec::from_stats(i, UnitType::Mover, stats, p.vision_scope))
                    .collect::<Result<Vec<_>>>()?;
                (specs, None, p.vision_scope)
            }
            ScenarioConfig::HeteroBattle(p) => {
                let table = UnitTable::with_overrides(&p.unit_stats);
                let specs = p
                    .allies
                    .iter()
                    .enumerate()
                    .map(|(i, t)| AgentSpec::from_stats(i, *t, table.get(*t)?, p.vision_scope))
                    .collect::<Result<Vec<_>>>()?;
                (specs, Some(table.get(p.enemy_type)?), p.vision_scope)
            }
        };
        let landmarks = match &config {
            ScenarioConfig::Spread(p) => match (&p.landmarks_at, p.landmark_layout) {
                (Some(l), LandmarkLayout::Fixed) => l.clone(),
                (None, LandmarkLayout::Fixed) => {
                    random_cells(&mut ChaCha8Rng::seed_from_u64(p.layout_seed), p.grid, p.landmarks)
                }
                // redrawn at every episode start
                _ => Vec::new(),
            },
            ScenarioConfig::DoubleSpread(p) => match &p.landmarks_at {
                Some(l) if p.landmark_layout == LandmarkLayout::Fixed => l.clone(),
                _ => corner_clusters(p.grid, p.landmarks),
            },
            ScenarioConfig::HeteroBattle(_) => Vec::new(),
        };
        let mut env = Self {
            config,
            specs,
            enemy,
            vision_scope,
            state: WorldState { tick: 0, agents: Vec::new(), entities: Vec::new() },
            landmarks,
            rng,
            seed,
            episode: 0,
        };
        env.start_episode();
        Ok(env)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn name(&self) -> &'static str {
        self.config.name()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn agent_count(&self) -> usize {
        self.specs.len()
    }

    pub fn agent_specs(&self) -> &[AgentSpec] {
        &self.specs
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn vision_scope(&self) -> f64 {
        self.vision_scope
    }

    pub fn episode_index(&self) -> u64 {
        self.episode
    }

    pub fn horizon(&self) -> usize {
        match &self.config {
            ScenarioConfig::Spread(p) | ScenarioConfig::DoubleSpread(p) => p.horizon,
            ScenarioConfig::HeteroBattle(p) => p.horizon,
        }
    }

    pub fn reward_bound(&self) -> f64 {
        match &self.config {
            ScenarioConfig::Spread(p) | ScenarioConfig::DoubleSpread(p) => p.reward_bound,
            ScenarioConfig::HeteroBattle(p) => p.reward_bound,
        }
    }

    pub fn action_count(&self) -> usize {
        match self.config {
            ScenarioConfig::HeteroBattle(_) => BATTLE_ACTIONS,
            _ => SPREAD_ACTIONS,
        }
    }

    /// Move / attack / heal for battles, stay / move for the landmark scenarios.
    pub fn semantic_grouping(&self) -> SemanticGrouping {
        let groups = match self.config {
            ScenarioConfig::HeteroBattle(_) => vec![0, 0, 0, 0, 0, 1, 1, 2, 2],
            _ => vec![0, 1, 1, 1, 1],
        };
        SemanticGrouping::new(groups).expect("static grouping")
    }

    /// Largest coordinate on either axis.
    pub fn extent(&self) -> f64 {
        match &self.config {
            ScenarioConfig::Spread(p) | ScenarioConfig::DoubleSpread(p) => (p.grid - 1) as f64,
            ScenarioConfig::HeteroBattle(p) => (p.size - 1) as f64,
        }
    }

    /// Changes the vision radius of every agent; attack ranges are kept.
    pub fn set_vision_scope(&mut self, scope: f64) -> Result<()> {
        if !(scope > 0.0) || !scope.is_finite() {
            return Err(Error::BadParams(format!("vision scope must be positive, got {scope}")));
        }
        let max_range = self.specs.iter().map(|s| s.attack_range).fold(0.0, f64::max);
        if scope < max_range {
            return Err(Error::ScopeBelowAttackRange { scope, attack_range: max_range });
        }
        self.vision_scope = scope;
        for s in &mut self.specs {
            s.vision_scope = scope;
        }
        Ok(())
    }

    /// Starts the next episode and returns its first observations.
    pub fn reset(&mut self) -> Vec<Observation> {
        self.episode += 1;
        self.start_episode();
        self.observations()
    }

    fn start_episode(&mut self) {
        let rng = &mut self.rng;
        let double = matches!(self.config, ScenarioConfig::DoubleSpread(_));
        match &self.config {
            ScenarioConfig::Spread(p) | ScenarioConfig::DoubleSpread(p) => {
                if p.landmark_layout == LandmarkLayout::PerEpisode {
                    self.landmarks = match &p.landmarks_at {
                        Some(c) => sample(rng, c.len(), p.landmarks).into_iter().map(|i| c[i]).collect(),
                        None => random_cells(rng, p.grid, p.landmarks),
                    };
                }
                let centre = ((p.grid - 1) / 2) as f64;
                // agents of the two-cluster variant always start between the clusters
                let layout = if double { StartLayout::Centre } else { p.start_layout };
                let starts: Vec<[f64; 2]> = match (&p.starts_at, layout) {
                    (Some(s), _) => s.clone(),
                    (None, StartLayout::Random) => (0..p.agents).map(|_| random_cell(rng, p.grid)).collect(),
                    (None, StartLayout::Clustered) => vec![random_cell(rng, p.grid); p.agents],
                    (None, StartLayout::Centre) => vec![[centre, centre]; p.agents],
                };
                self.state = WorldState {
                    tick: 0,
                    agents: starts
                        .into_iter()
                        .map(|position| UnitState { position, health: 1.0, alive: true })
                        .collect(),
                    entities: self
                        .landmarks
                        .iter()
                        .map(|&position| EntityState {
                            kind: EntityKind::Landmark,
                            position,
                            health: 1.0,
                            max_health: 1.0,
                            alive: true,
                        })
                        .collect(),
                };
            }
            ScenarioConfig::HeteroBattle(p) => {
                let size = p.size as f64;
                let enemy = self.enemy.expect("battle has enemy stats");
                let n = self.specs.len();
                let top = ((p.size - n) / 2) as f64;
                let agents = self
                    .specs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| UnitState { position: [0.0, top + i as f64], health: s.max_health, alive: true })
                    .collect();
                let rows = sample(rng, p.size, p.enemies);
                let mut rows: Vec<usize> = rows.into_iter().collect();
                rows.sort_unstable();
                let entities = rows
                    .into_iter()
                    .map(|r| {
                        let x = size - 1.0 - rng.gen_range(0..2) as f64;
                        EntityState {
                            kind: EntityKind::Enemy,
                            position: [x, r as f64],
                            health: enemy.max_health,
                            max_health: enemy.max_health,
                            alive: true,
                        }
                    })
                    .collect();
                self.state = WorldState { tick: 0, agents, entities };
            }
        }
    }

    pub fn observations(&self) -> Vec<Observation> {
        (0..self.specs.len()).map(|i| self.observe(i)).collect()
    }

    fn observe(&self, i: usize) -> Observation {
        let me = &self.state.agents[i];
        let spec = &self.specs[i];
        let mut obs = Observation {
            observer_id: i,
            alive: me.alive,
            position: me.position,
            health: me.health / spec.max_health,
            unit_type: spec.unit_type,
            visible: Vec::new(),
            available: vec![false; self.action_count()],
        };
        if !me.alive {
            return obs;
        }
        let mut seen = |kind, index, pos: [f64; 2], health: f64| {
            let d = dist(me.position, pos);
            if d <= self.vision_scope {
                obs.visible.push(VisibleEntity {
                    kind,
                    index,
                    rel: [pos[0] - me.position[0], pos[1] - me.position[1]],
                    distance: d,
                    health,
                });
            }
        };
        for (j, a) in self.state.agents.iter().enumerate() {
            if j != i && a.alive {
                seen(EntityKind::Ally, j, a.position, a.health / self.specs[j].max_health);
            }
        }
        for (j, e) in self.state.entities.iter().enumerate() {
            if e.alive {
                seen(e.kind, j, e.position, e.health / e.max_health);
            }
        }
        obs.visible
            .sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.kind.cmp(&b.kind)).then(a.index.cmp(&b.index)));
        for m in &mut obs.available[..MOVE_DIRS.len()] {
            *m = true;
        }
        if matches!(self.config, ScenarioConfig::HeteroBattle(_)) {
            for k in 0..TARGET_SLOTS {
                obs.available[ATTACK_BASE + k] = self.attack_target(i, k).is_some();
                obs.available[HEAL_BASE + k] = self.heal_target(i, k).is_some();
            }
        }
        obs
    }

    /// The `k`-th nearest alive enemy inside the agent's attack range.
    fn attack_target(&self, i: usize, k: usize) -> Option<usize> {
        let spec = &self.specs[i];
        if spec.unit_type == UnitType::Healer || spec.damage <= 0.0 {
            return None;
        }
        let me = self.state.agents[i].position;
        let mut c: Vec<(f64, usize)> = self
            .state
            .entities
            .iter()
            .enumerate()
            .filter(|(_, e)| e.alive && e.kind == EntityKind::Enemy)
            .map(|(j, e)| (dist(me, e.position), j))
            .filter(|(d, _)| *d <= spec.attack_range)
            .collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        c.get(k).map(|x| x.1)
    }

    /// The `k`-th nearest wounded ally (other than self) inside a healer's range.
    fn heal_target(&self, i: usize, k: usize) -> Option<usize> {
        let spec = &self.specs[i];
        if spec.unit_type != UnitType::Healer {
            return None;
        }
        let me = self.state.agents[i].position;
        let mut c: Vec<(f64, usize)> = self
            .state
            .agents
            .iter()
            .enumerate()
            .filter(|(j, a)| *j != i && a.alive && a.health < self.specs[*j].max_health)
            .map(|(j, a)| (dist(me, a.position), j))
            .filter(|(d, _)| *d <= spec.attack_range)
            .collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        c.get(k).map(|x| x.1)
    }

    fn check_actions(&self, joint: &JointAction) -> Result<()> {
        if joint.len() != self.specs.len() {
            return Err(Error::DimensionMismatch { expected: self.specs.len(), actual: joint.len() });
        }
        let n = self.action_count();
        for (i, (a, s)) in joint.iter().zip(&self.state.agents).enumerate() {
            match (a, s.alive) {
                (None, false) => {}
                (None, true) => {
                    return Err(Error::IllegalAction { agent: i, reason: "alive agent has no action".into() })
                }
                (Some(_), false) => return Err(Error::IllegalAction { agent: i, reason: "agent is dead".into() }),
                (Some(a), true) if *a >= n => {
                    return Err(Error::IllegalAction { agent: i, reason: format!("action {a} outside 0..{n}") })
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn moved(&self, pos: [f64; 2], action: usize, speed: f64) -> [f64; 2] {
        let d = MOVE_DIRS[action];
        let max = self.extent();
        [(pos[0] + d[0] * speed).clamp(0.0, max), (pos[1] + d[1] * speed).clamp(0.0, max)]
    }

    /// Advances one tick. Actions that are in range but currently unavailable
    /// (no target in reach) leave the unit where it is.
    pub fn step(&mut self, joint: &JointAction) -> Result<StepResult> {
        self.check_actions(joint)?;
        let (reward, terminated, mut info) = match &self.config {
            ScenarioConfig::HeteroBattle(_) => self.battle_step(joint),
            _ => self.spread_step(joint),
        };
        self.state.tick += 1;
        let bound = self.reward_bound();
        let reward = reward.clamp(-bound, bound);
        assert!(reward.abs() <= bound, "reward {reward} exceeds bound {bound}");
        let truncated = !terminated && self.state.tick >= self.horizon();
        info.insert("allies_alive".into(), self.state.agents.iter().filter(|a| a.alive).count() as f64);
        Ok(StepResult { observations: self.observations(), reward, terminated, truncated, info })
    }

    fn spread_step(&mut self, joint: &JointAction) -> (f64, bool, BTreeMap<String, f64>) {
        for (i, a) in joint.iter().enumerate() {
            if let Some(a) = *a {
                let p = self.moved(self.state.agents[i].position, a, self.specs[i].move_speed);
                self.state.agents[i].position = p;
            }
        }
        let p = match &self.config {
            ScenarioConfig::Spread(p) | ScenarioConfig::DoubleSpread(p) => p,
            ScenarioConfig::HeteroBattle(_) => unreachable!(),
        };
        let agents: Vec<[f64; 2]> = self.state.agents.iter().map(|a| a.position).collect();
        let lm = &self.landmarks;
        let mut covered = 0.0;
        let raw = match (p.reward, p.assignment) {
            (SpreadReward::Distance, Assignment::Nearest) => -(0..lm.len())
                .map(|l| p.weight(l) * agents.iter().map(|a| dist(*a, lm[l])).fold(f64::INFINITY, f64::min))
                .sum::<f64>(),
            (SpreadReward::Distance, Assignment::Assigned) => -(0..agents.len())
                .map(|i| {
                    let l = i % lm.len();
                    p.weight(l) * dist(agents[i], lm[l])
                })
                .sum::<f64>(),
            (SpreadReward::Capture { radius }, Assignment::Nearest) => (0..lm.len())
                .filter(|&l| agents.iter().any(|a| dist(*a, lm[l]) <= radius))
                .map(|l| {
                    covered += 1.0;
                    p.weight(l)
                })
                .sum(),
            (SpreadReward::Capture { radius }, Assignment::Assigned) => (0..agents.len())
                .filter(|&i| dist(agents[i], lm[i % lm.len()]) <= radius)
                .map(|i| {
                    covered += 1.0;
                    p.weight(i % lm.len())
                })
                .sum(),
        };
        let info = BTreeMap::from([("covered".to_string(), covered)]);
        (raw * p.reward_scale, false, info)
    }

    fn battle_step(&mut self, joint: &JointAction) -> (f64, bool, BTreeMap<String, f64>) {
        let p = match &self.config {
            ScenarioConfig::HeteroBattle(p) => p.clone(),
            _ => unreachable!(),
        };
        let enemy = self.enemy.expect("battle has enemy stats");
        // targets come from the state at the start of the tick
        let mut attacks = Vec::new();
        let mut heals = Vec::new();
        let mut moves = Vec::new();
        for (i, a) in joint.iter().enumerate() {
            let Some(a) = *a else { continue };
            if a < ATTACK_BASE {
                moves.push((i, a));
            } else if a < HEAL_BASE {
                if let Some(t) = self.attack_target(i, a - ATTACK_BASE) {
                    attacks.push((i, t));
                }
            } else if let Some(t) = self.heal_target(i, a - HEAL_BASE) {
                heals.push((i, t));
            }
        }
        let mut dealt = 0.0;
        for (i, t) in attacks {
            let e = &mut self.state.entities[t];
            let d = self.specs[i].damage.min(e.health);
            e.health -= d;
            dealt += d;
        }
        let mut healed = 0.0;
        for (i, t) in heals {
            let max = self.specs[t].max_health;
            let a = &mut self.state.agents[t];
            let h = self.specs[i].damage.min(max - a.health).max(0.0);
            a.health += h;
            healed += h;
        }
        for (i, a) in moves {
            let p = self.moved(self.state.agents[i].position, a, self.specs[i].move_speed);
            self.state.agents[i].position = p;
        }
        for e in &mut self.state.entities {
            if e.alive && e.health <= 0.0 {
                e.health = 0.0;
                e.alive = false;
            }
        }
        let mut received = 0.0;
        for act in scripted_enemy_policy(&self.state, enemy.attack_range) {
            match act {
                EnemyAction::Stay => {}
                EnemyAction::Attack { enemy: _, target } => {
                    let a = &mut self.state.agents[target];
                    let d = enemy.damage.min(a.health);
                    a.health -= d;
                    received += d;
                }
                EnemyAction::Move { enemy: j, to } => {
                    self.state.entities[j].position = to;
                }
            }
        }
        for a in &mut self.state.agents {
            if a.alive && a.health <= 0.0 {
                a.health = 0.0;
                a.alive = false;
            }
        }
        let won = self.state.entities.iter().all(|e| !e.alive);
        let lost = self.state.agents.iter().all(|a| !a.alive);
        let total_enemy = enemy.max_health * p.enemies as f64;
        let scale = p.reward_bound / (total_enemy + p.win_bonus);
        let mut raw = dealt - p.received_weight * received + p.received_weight * healed;
        if won {
            raw += p.win_bonus;
        }
        let remaining: f64 = self.state.entities.iter().map(|e| e.health).sum();
        let info = BTreeMap::from([
            ("enemy_health".to_string(), remaining / total_enemy),
            ("won".to_string(), if won { 1.0 } else { 0.0 }),
        ]);
        (raw * scale, won || lost, info)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnemyAction {
    Stay,
    Attack { enemy: usize, target: usize },
    Move { enemy: usize, to: [f64; 2] },
}

/// Every alive enemy attacks its nearest alive ally when in range and
/// otherwise steps one cell towards it along the longer axis. Ties between
/// allies go to the lowest agent id; ties between axes go to x.
pub fn scripted_enemy_policy(state: &WorldState, attack_range: f64) -> Vec<EnemyAction> {
    let mut out = Vec::new();
    for (j, e) in state.entities.iter().enumerate() {
        if !e.alive || e.kind != EntityKind::Enemy {
            continue;
        }
        let target = state
            .agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.alive)
            .map(|(i, a)| (dist(e.position, a.position), i))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let Some((d, i)) = target else {
            out.push(EnemyAction::Stay);
            continue;
        };
        if d <= attack_range {
            out.push(EnemyAction::Attack { enemy: j, target: i });
        } else {
            let to = state.agents[i].position;
            let dx = to[0] - e.position[0];
            let dy = to[1] - e.position[1];
            let mut p = e.position;
            if dx.abs() >= dy.abs() {
                p[0] += dx.signum();
            } else {
                p[1] += dy.signum();
            }
            out.push(EnemyAction::Move { enemy: j, to: p });
        }
    }
    out
}

fn random_cell(rng: &mut ChaCha8Rng, grid: usize) -> [f64; 2] {
    [rng.gen_range(0..grid) as f64, rng.gen_range(0..grid) as f64]
}

/// Distinct random cells.
fn random_cells(rng: &mut ChaCha8Rng, grid: usize, n: usize) -> Vec<[f64; 2]> {
    sample(rng, grid * grid, n).into_iter().map(|c| [(c % grid) as f64, (c / grid) as f64]).collect()
}

/// Landmarks split between the two opposite corners, filling outwards.
fn corner_clusters(grid: usize, n: usize) -> Vec<[f64; 2]> {
    let max = (grid - 1) as f64;
    let offsets: [[f64; 2]; 6] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.0], [0.0, 2.0]];
    (0..n)
        .map(|k| {
            let o = offsets[(k / 2) % offsets.len()];
            if k % 2 == 0 {
                [o[0].min(max), o[1].min(max)]
            } else {
                [(max - o[0]).max(0.0), (max - o[1]).max(0.0)]
            }
        })
        .collect()
}
