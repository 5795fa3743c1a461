use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const KERNEL_TOLERANCE: f64 = 1e-9;
const VALUE_TOLERANCE: f64 = 1e-10;
/// Largest joint observation-action support the oracle will enumerate.
pub const MAX_JOINT_SUPPORT: usize = 1 << 20;

/// One agent's local observation process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentMdp {
    /// `kernel[z][u]` is the distribution of the next observation.
    pub kernel: Vec<Vec<Vec<f64>>>,
    /// `reward[z][u]`.
    pub reward: Vec<Vec<f64>>,
}

impl AgentMdp {
    pub fn states(&self) -> usize {
        self.reward.len()
    }

    pub fn actions(&self) -> usize {
        self.reward.first().map_or(0, |r| r.len())
    }

    fn validate(&self, agent: usize) -> Result<()> {
        let (s, a) = (self.states(), self.actions());
        if s == 0 || a == 0 {
            return Err(Error::BadParams(format!("agent {agent} needs at least one observation and one action")));
        }
        for row in &self.reward {
            if row.len() != a {
                return Err(Error::DimensionMismatch { expected: a, actual: row.len() });
            }
        }
        if self.kernel.len() != s {
            return Err(Error::DimensionMismatch { expected: s, actual: self.kernel.len() });
        }
        for (z, per_action) in self.kernel.iter().enumerate() {
            if per_action.len() != a {
                return Err(Error::DimensionMismatch { expected: a, actual: per_action.len() });
            }
            for (u, row) in per_action.iter().enumerate() {
                if row.len() != s {
                    return Err(Error::DimensionMismatch { expected: s, actual: row.len() });
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > KERNEL_TOLERANCE {
                    return Err(Error::BadKernel(format!("agent {agent} row ({z}, {u}) sums to {sum}")));
                }
            }
        }
        Ok(())
    }

    /// Bellman optimality backup `r + gamma * E max Q(z')` of a local table.
    pub(crate) fn backup(&self, q: &ValueTable, gamma: f64) -> ValueTable {
        let maxes: Vec<f64> = (0..self.states()).map(|z| q.max(z)).collect();
        let mut out = ValueTable::zeros(self.states(), self.actions());
        for z in 0..self.states() {
            for u in 0..self.actions() {
                let ev: f64 = self.kernel[z][u].iter().zip(&maxes).map(|(p, m)| p * m).sum();
                out.set(z, u, self.reward[z][u] + gamma * ev);
            }
        }
        out
    }
}

/// A cooperative finite MDP whose agents evolve independently and whose
/// joint reward is a fixed convex mix of the individual rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteMDPSpec {
    pub agents: Vec<AgentMdp>,
    /// Weights of the individual rewards in the joint reward; on the simplex.
    pub mix: Vec<f64>,
    pub gamma: f64,
    pub reward_bound: f64,
    /// Every agent receives the same reward function.
    #[serde(default)]
    pub shared_reward: bool,
    /// Half-width of the uniform noise added to sampled rewards.
    #[serde(default)]
    pub reward_noise: f64,
}

impl FiniteMDPSpec {
    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.agents.len();
        if n == 0 {
            return Err(Error::BadParams("finite MDP needs at least one agent".into()));
        }
        if self.mix.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: self.mix.len() });
        }
        if self.mix.iter().any(|w| !(*w >= 0.0)) || (self.mix.iter().sum::<f64>() - 1.0).abs() > KERNEL_TOLERANCE {
            return Err(Error::BadParams("mix must lie on the simplex".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::BadParams(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(self.reward_bound > 0.0) || !(self.reward_noise >= 0.0) {
            return Err(Error::BadParams("reward_bound must be positive and reward_noise non-negative".into()));
        }
        for (i, a) in self.agents.iter().enumerate() {
            a.validate(i)?;
            let peak = a.reward.iter().flatten().fold(0f64, |m, r| m.max(r.abs()));
            if !(peak + self.reward_noise <= self.reward_bound) {
                return Err(Error::BadParams(format!("agent {i} rewards exceed the bound {}", self.reward_bound)));
            }
        }
        if self.shared_reward && self.agents.iter().any(|a| a.reward != self.agents[0].reward) {
            return Err(Error::BadParams("shared_reward requires identical reward tables".into()));
        }
        let mut support = 1usize;
        for a in &self.agents {
            support = support.saturating_mul(a.states() * a.actions());
        }
        if support > MAX_JOINT_SUPPORT {
            return Err(Error::BadParams(format!("joint support {support} exceeds {MAX_JOINT_SUPPORT}")));
        }
        Ok(())
    }

    /// All agents have the same observation and action counts, so one table can serve them all.
    pub fn is_uniform(&self) -> bool {
        let (s, a) = (self.agents[0].states(), self.agents[0].actions());
        self.agents.iter().all(|x| x.states() == s && x.actions() == a)
    }

    pub fn support(&self) -> JointSupport {
        JointSupport::new(self.agents.iter().map(|a| (a.states(), a.actions())).collect())
    }
}

/// A dense `observation x action` value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub states: usize,
    pub actions: usize,
    pub values: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(states: usize, actions: usize) -> Self {
        Self { states, actions, values: vec![0.0; states * actions] }
    }

    pub fn get(&self, z: usize, u: usize) -> f64 {
        self.values[z * self.actions + u]
    }

    pub fn set(&mut self, z: usize, u: usize, v: f64) {
        self.values[z * self.actions + u] = v;
    }

    pub fn max(&self, z: usize) -> f64 {
        self.values[z * self.actions..(z + 1) * self.actions].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action; ties go to the lowest index.
    pub fn argmax(&self, z: usize) -> usize {
        let row = &self.values[z * self.actions..(z + 1) * self.actions];
        let mut best = 0;
        for (u, v) in row.iter().enumerate() {
            if *v > row[best] {
                best = u;
            }
        }
        best
    }

    pub fn sup_distance(&self, other: &ValueTable) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Mixed-radix enumeration of joint observations and joint actions.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSupport {
    dims: Vec<(usize, usize)>,
    states: usize,
    actions: usize,
}

impl JointSupport {
    pub fn new(dims: Vec<(usize, usize)>) -> Self {
        let states = dims.iter().map(|d| d.0).product();
        let actions = dims.iter().map(|d| d.1).product();
        Self { dims, states, actions }
    }

    pub fn agents(&self) -> usize {
        self.dims.len()
    }

    pub fn joint_states(&self) -> usize {
        self.states
    }

    pub fn joint_actions(&self) -> usize {
        self.actions
    }

    /// Number of joint `(state, action)` cells.
    pub fn len(&self) -> usize {
        self.states * self.actions
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn decode_states(&self, mut s: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|d| {
                let z = s % d.0;
                s /= d.0;
                z
            })
            .collect()
    }

    pub fn decode_actions(&self, mut u: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|d| {
                let a = u % d.1;
                u /= d.1;
                a
            })
            .collect()
    }

    /// Per-agent `(z_i, u_i)` of joint cell `k = s * joint_actions + u`.
    pub fn cell(&self, k: usize) -> Vec<(usize, usize)> {
        let zs = self.decode_states(k / self.actions);
        let us = self.decode_actions(k % self.actions);
        zs.into_iter().zip(us).collect()
    }

    /// Evaluates per-agent tables on every joint cell; `out[i][k]`.
    pub fn evaluate(&self, tables: &[&ValueTable]) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.len()); tables.len()];
        for k in 0..self.len() {
            for (i, (z, u)) in self.cell(k).into_iter().enumerate() {
                out[i].push(tables[i].get(z, u));
            }
        }
        out
    }
}

/// Exact optimal values of a finite MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// `Q*_i` of every agent on its own observation process.
    pub agents: Vec<ValueTable>,
    /// `Q*_tot` on the joint MDP, indexed by joint cell.
    pub joint: Vec<f64>,
    /// Fixed point of the agent-averaged backup; present when all agents share dimensions.
    pub averaged: Option<ValueTable>,
}

fn iterate(mut q: ValueTable, step: impl Fn(&ValueTable) -> ValueTable) -> ValueTable {
    loop {
        let next = step(&q);
        let d = next.sup_distance(&q);
        q = next;
        if d <= VALUE_TOLERANCE {
            return q;
        }
    }
}

/// Value iteration to sup-norm tolerance 1e-10 on each agent, on the
/// agent-averaged backup and on the joint MDP.
pub fn value_iteration_oracle(spec: &FiniteMDPSpec) -> Result<OracleSolution> {
    spec.validate()?;
    let gamma = spec.gamma;
    let agents: Vec<ValueTable> = spec
        .agents
        .iter()
        .map(|a| iterate(ValueTable::zeros(a.states(), a.actions()), |q| a.backup(q, gamma)))
        .collect();
    let averaged = spec.is_uniform().then(|| {
        let (s, u) = (spec.agents[0].states(), spec.agents[0].actions());
        iterate(ValueTable::zeros(s, u), |q| averaged_backup(spec, q))
    });
    Ok(OracleSolution { agents, joint: joint_value_iteration(spec), averaged })
}

/// Mean over agents of the individual backups applied to one shared table.
pub(crate) fn averaged_backup(spec: &FiniteMDPSpec, q: &ValueTable) -> ValueTable {
    let n = spec.agents.len() as f64;
    let mut out = ValueTable::zeros(q.states, q.actions);
    for a in &spec.agents {
        let b = a.backup(q, spec.gamma);
        for (o, v) in out.values.iter_mut().zip(&b.values) {
            *o += v / n;
        }
    }
    out
}

fn joint_value_iteration(spec: &FiniteMDPSpec) -> Vec<f64> {
    let sup = spec.support();
    let (ns, na) = (sup.joint_states(), sup.joint_actions());
    let states: Vec<Vec<usize>> = (0..ns).map(|s| sup.decode_states(s)).collect();
    let actions: Vec<Vec<usize>> = (0..na).map(|u| sup.decode_actions(u)).collect();
    let reward: Vec<f64> = (0..ns * na)
        .map(|k| {
            let (zs, us) = (&states[k / na], &actions[k % na]);
            spec.agents.iter().enumerate().map(|(i, a)| spec.mix[i] * a.reward[zs[i]][us[i]]).sum()
        })
        .collect();
    // sparse joint successor lists built from the product of local kernels
    let successors: Vec<Vec<(usize, f64)>> = (0..ns * na)
        .map(|k| {
            let (zs, us) = (&states[k / na], &actions[k % na]);
            let mut dist = vec![(0usize, 1.0f64)];
            let mut radix = 1;
            for (i, a) in spec.agents.iter().enumerate() {
                let row = &a.kernel[zs[i]][us[i]];
                let mut next = Vec::with_capacity(dist.len() * row.len());
                for &(s, p) in &dist {
                    for (z, q) in row.iter().enumerate() {
                        if *q > 0.0 {
                            next.push((s + z * radix, p * q));
                        }
                    }
                }
                dist = next;
                radix *= a.states();
            }
            dist
        })
        .collect();
    let mut q = vec![0.0; ns * na];
    loop {
        let v: Vec<f64> =
            (0..ns).map(|s| q[s * na..(s + 1) * na].iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        let next: Vec<f64> = (0..ns * na)
            .map(|k| reward[k] + spec.gamma * successors[k].iter().map(|(s, p)| p * v[*s]).sum::<f64>())
            .collect();
        let d = next.iter().zip(&q).fold(0f64, |m, (a, b)| m.max((a - b).abs()));
        q = next;
        if d <= VALUE_TOLERANCE {
            return q;
        }
    }
}
