use serde::{Deserialize, Serialize};

use super::distribution::ActionDistribution;
use crate::{Error, Result};

/// Windowed action-frequency profile of one agent around a timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRoleProfile {
    pub agent_id: usize,
    pub center_step: usize,
    pub half_window: usize,
    pub distribution: ActionDistribution,
}

/// Mean of `history[T-n ..= T+n]`, clipped to the episode and divided by the
/// number of steps actually inside the window.
pub fn action_role_profile(
    history: &[ActionDistribution],
    center_step: usize,
    half_window: usize,
) -> Result<ActionRoleProfile> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    if center_step >= history.len() {
        return Err(Error::InvalidArgument(format!(
            "center step {center_step} outside history of length {}",
            history.len()
        )));
    }
    let (lo, hi) = clipped_window(history.len(), center_step, half_window);
    let distribution = window_mean(history[lo..=hi].iter())?;
    Ok(ActionRoleProfile { agent_id: 0, center_step, half_window, distribution })
}

pub(crate) fn clipped_window(len: usize, center: usize, half: usize) -> (usize, usize) {
    (center.saturating_sub(half), (center + half).min(len - 1))
}

/// Arithmetic mean of distributions, renormalised to absorb rounding.
pub(crate) fn window_mean<'a>(items: impl Iterator<Item = &'a ActionDistribution>) -> Result<ActionDistribution> {
    let mut acc: Vec<f64> = Vec::new();
    let mut count = 0usize;
    for d in items {
        if acc.is_empty() {
            acc = vec![0.0; d.action_count()];
        } else if acc.len() != d.action_count() {
            return Err(Error::DimensionMismatch { expected: acc.len(), actual: d.action_count() });
        }
        for (a, p) in acc.iter_mut().zip(d.probs()) {
            *a += p;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyHistory);
    }
    ActionDistribution::from_weights(acc)
}

/// How the absolute value gap between two agents is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContributionNormalization {
    /// Divide by the largest absolute gap over all agent pairs.
    #[default]
    MaxPairDifference,
    /// Divide by the larger magnitude of the two values, clamped to `[0, 1]`.
    PairMagnitude,
}

/// Normalised value gap between agents `i` and `j`; 0 when the denominator vanishes.
pub fn contribution_distance(values: &[f64], i: usize, j: usize) -> Result<f64> {
    contribution_distance_with(values, i, j, ContributionNormalization::MaxPairDifference)
}

pub fn contribution_distance_with(values: &[f64], i: usize, j: usize, norm: ContributionNormalization) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewAgents(values.len()));
    }
    if i == j || i >= values.len() || j >= values.len() {
        return Err(Error::InvalidArgument(format!("bad agent pair ({i}, {j}) for {} agents", values.len())));
    }
    let gap = (values[i] - values[j]).abs();
    let denom = match norm {
        ContributionNormalization::MaxPairDifference => max_pair_gap(values),
        ContributionNormalization::PairMagnitude => values[i].abs().max(values[j].abs()),
    };
    if denom <= 0.0 || !denom.is_finite() {
        return Ok(0.0);
    }
    Ok((gap / denom).clamp(0.0, 1.0))
}

fn max_pair_gap(values: &[f64]) -> f64 {
    // the largest pairwise gap is max - min
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    hi - lo
}

/// Symmetric agent-by-agent distance grid with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDistanceMatrix {
    agent_count: usize,
    entries: Vec<f64>,
}

impl PairwiseDistanceMatrix {
    /// Validates a row-major `A x A` grid.
    pub fn new(agent_count: usize, entries: Vec<f64>) -> Result<Self> {
        if agent_count < 2 {
            return Err(Error::TooFewAgents(agent_count));
        }
        if entries.len() != agent_count * agent_count {
            return Err(Error::DimensionMismatch { expected: agent_count * agent_count, actual: entries.len() });
        }
        for i in 0..agent_count {
            if entries[i * agent_count + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is non-zero")));
            }
            for j in 0..agent_count {
                let v = entries[i * agent_count + j];
                if !(v >= 0.0) || v != entries[j * agent_count + i] {
                    return Err(Error::InvalidArgument(format!("entry ({i}, {j}) breaks symmetry or sign")));
                }
            }
        }
        Ok(Self { agent_count, entries })
    }

    /// Fills the upper triangle from `distance(i, j)` for `i < j` and mirrors it.
    pub fn from_pairs(agent_count: usize, mut distance: impl FnMut(usize, usize) -> Result<f64>) -> Result<Self> {
        if agent_count < 2 {
            return Err(Error::TooFewAgents(agent_count));
        }
        let mut entries = vec![0.0; agent_count * agent_count];
        for i in 0..agent_count {
            for j in i + 1..agent_count {
                let d = distance(i, j)?;
                if !(d >= 0.0) {
                    return Err(Error::InvalidArgument(format!("negative distance {d} for pair ({i}, {j})")));
                }
                entries[i * agent_count + j] = d;
                entries[j * agent_count + i] = d;
            }
        }
        Ok(Self { agent_count, entries })
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.agent_count + j]
    }

    /// Relabels agents: entry `(i, j)` of the result is entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.agent_count;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Self { agent_count: n, entries }
    }
}

/// Mean distance over the `A (A - 1) / 2` unordered pairs of distinct agents.
pub fn role_diversity(m: &PairwiseDistanceMatrix) -> f64 {
    let n = m.agent_count();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += m.get(i, j);
        }
    }
    total / (n * (n - 1) / 2) as f64
}
