use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::keys::ObsKey;

type FixedState = BuildHasherDefault<DefaultHasher>;

/// Tabular action values keyed by observation signature.
#[derive(Debug, Clone, PartialEq)]
pub struct QFunction {
    actions: usize,
    default: f64,
    /// Values are kept inside `[-bound, bound]`.
    bound: f64,
    table: HashMap<ObsKey, Vec<f64>, FixedState>,
}

/// Serialisable form of a table, rows sorted by key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTableDump {
    pub actions: usize,
    pub default: f64,
    pub bound: f64,
    pub rows: Vec<(ObsKey, Vec<f64>)>,
}

impl QFunction {
    pub fn new(actions: usize, default: f64, bound: f64) -> Self {
        assert!(actions > 0 && bound > 0.0);
        Self { actions, default: default.clamp(-bound, bound), bound, table: HashMap::default() }
    }

    /// Value clip `M / (1 - gamma)`.
    pub fn value_bound(reward_bound: f64, gamma: f64) -> f64 {
        reward_bound / (1.0 - gamma)
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, key: &[i32], action: usize) -> f64 {
        self.table.get(key).map_or(self.default, |r| r[action])
    }

    pub fn row(&self, key: &[i32]) -> Option<&[f64]> {
        self.table.get(key).map(|r| r.as_slice())
    }

    /// Adds `delta` to one entry and clips it. A zero step leaves unseen keys unstored.
    pub fn add(&mut self, key: &[i32], action: usize, delta: f64) {
        let (actions, default, bound) = (self.actions, self.default, self.bound);
        let row = match self.table.get_mut(key) {
            Some(r) => r,
            None if delta == 0.0 => return,
            None => self.table.entry(key.to_vec()).or_insert_with(|| vec![default; actions]),
        };
        row[action] = (row[action] + delta).clamp(-bound, bound);
    }

    pub fn set(&mut self, key: &[i32], action: usize, value: f64) {
        let v = self.get(key, action);
        self.add(key, action, value - v);
    }

    /// Highest value among the available actions, or 0 when none is available.
    pub fn max_available(&self, key: &[i32], available: &[bool]) -> f64 {
        self.greedy(key, available).map_or(0.0, |a| self.get(key, a))
    }

    /// Greedy available action; ties go to the lowest index.
    pub fn greedy(&self, key: &[i32], available: &[bool]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for a in 0..self.actions {
            if !available.get(a).copied().unwrap_or(false) {
                continue;
            }
            let v = self.get(key, a);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((a, v));
            }
        }
        best.map(|b| b.0)
    }

    /// Largest absolute stored value.
    pub fn max_abs(&self) -> f64 {
        self.table.values().flatten().fold(self.default.abs(), |m, v| m.max(v.abs()))
    }

    pub fn dump(&self) -> QTableDump {
        let mut rows: Vec<(ObsKey, Vec<f64>)> = self.table.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        QTableDump { actions: self.actions, default: self.default, bound: self.bound, rows }
    }

    pub fn from_dump(d: QTableDump) -> Self {
        let mut q = Self::new(d.actions, d.default, d.bound);
        for (k, v) in d.rows {
            q.table.insert(k, v);
        }
        q
    }
}

/// Per-agent epsilon-greedy choice over available actions. Dead agents (no
/// available action) get `None`.
pub fn select_actions(
    q: &QFunction,
    keys: &[ObsKey],
    available: &[Vec<bool>],
    epsilon: f64,
    rng: &mut impl Rng,
) -> Vec<Option<usize>> {
    keys.iter()
        .zip(available)
        .map(|(k, avail)| {
            let greedy = q.greedy(k, avail)?;
            if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
                let n = avail.iter().filter(|a| **a).count();
                let pick = rng.gen_range(0..n);
                avail.iter().enumerate().filter(|(_, a)| **a).nth(pick).map(|(i, _)| i)
            } else {
                Some(greedy)
            }
        })
        .collect()
}

/// The epsilon-greedy mixture the sampling above draws from.
pub fn epsilon_greedy_distribution(q: &QFunction, key: &[i32], available: &[bool], epsilon: f64) -> Option<Vec<f64>> {
    let greedy = q.greedy(key, available)?;
    let n = available.iter().filter(|a| **a).count() as f64;
    let mut p: Vec<f64> = available.iter().map(|a| if *a { epsilon / n } else { 0.0 }).collect();
    p[greedy] += 1.0 - epsilon;
    Some(p)
}
