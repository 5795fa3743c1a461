use serde::{Deserialize, Serialize};

use super::keys::ObsKey;
use super::qfunction::QFunction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CreditKind {
    /// Independent learners, each treating the shared reward as its own.
    Iql,
    /// Joint value is the plain sum of individual values.
    VdnSum,
    /// Joint value is a simplex-weighted sum with learned weights.
    LearnableWeights,
}

impl CreditKind {
    pub const ALL: [CreditKind; 3] = [CreditKind::Iql, CreditKind::VdnSum, CreditKind::LearnableWeights];

    pub fn name(self) -> &'static str {
        match self {
            CreditKind::Iql => "iql",
            CreditKind::VdnSum => "vdn_sum",
            CreditKind::LearnableWeights => "learnable_weights",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditAssignment {
    pub kind: CreditKind,
    /// Mixing weights on the simplex; used by `LearnableWeights` only.
    pub weights: Vec<f64>,
    pub weight_lr: f64,
}

impl CreditAssignment {
    pub fn new(kind: CreditKind, agents: usize, weight_lr: f64) -> Self {
        Self { kind, weights: vec![1.0 / agents as f64; agents], weight_lr }
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    // remove rounding drift so the mass is 1 to machine precision
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

/// One joint transition as stored in replay. Dead agents have `None` keys.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub keys: Vec<Option<ObsKey>>,
    pub actions: Vec<Option<usize>>,
    pub reward: f64,
    pub next_keys: Vec<Option<ObsKey>>,
    pub next_available: Vec<Vec<bool>>,
    pub terminal: bool,
}

/// Applies TD(0) updates for every transition of the batch in order and
/// returns the mean absolute TD error.
pub fn td_update(
    q: &mut QFunction,
    credit: &mut CreditAssignment,
    batch: &[Transition],
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for tr in batch {
        let next_max: Vec<f64> = tr
            .next_keys
            .iter()
            .zip(&tr.next_available)
            .map(|(k, avail)| match (k, tr.terminal) {
                (Some(k), false) => q.max_available(k, avail),
                _ => 0.0,
            })
            .collect();
        let acting: Vec<(usize, &ObsKey, usize)> = tr
            .keys
            .iter()
            .zip(&tr.actions)
            .enumerate()
            .filter_map(|(i, (k, a))| Some((i, k.as_ref()?, (*a)?)))
            .collect();
        match credit.kind {
            CreditKind::Iql => {
                let deltas: Vec<(usize, f64)> =
                    acting.iter().map(|&(i, k, a)| (i, tr.reward + gamma * next_max[i] - q.get(k, a))).collect();
                for (&(_, k, a), (_, d)) in acting.iter().zip(&deltas) {
                    q.add(k, a, alpha * d);
                    total += d.abs();
                    count += 1;
                }
            }
            CreditKind::VdnSum => {
                let current: f64 = acting.iter().map(|&(_, k, a)| q.get(k, a)).sum();
                let target = tr.reward + gamma * next_max.iter().sum::<f64>();
                let d = target - current;
                for &(_, k, a) in &acting {
                    q.add(k, a, alpha * d);
                }
                total += d.abs();
                count += 1;
            }
            CreditKind::LearnableWeights => {
                let w = credit.weights.clone();
                let values: Vec<(usize, f64)> = acting.iter().map(|&(i, k, a)| (i, q.get(k, a))).collect();
                let current: f64 = values.iter().map(|(i, v)| w[*i] * v).sum();
                let target = tr.reward + gamma * next_max.iter().zip(&w).map(|(m, wi)| m * wi).sum::<f64>();
                let d = target - current;
                for &(i, k, a) in &acting {
                    q.add(k, a, alpha * d * w[i]);
                }
                if credit.weight_lr != 0.0 {
                    let mut stepped = w;
                    for (i, v) in values {
                        stepped[i] += credit.weight_lr * d * v;
                    }
                    credit.weights = project_to_simplex(&stepped);
                }
                total += d.abs();
                count += 1;
            }
        }
    }
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}
