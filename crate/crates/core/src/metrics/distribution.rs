use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Default additive smoothing applied to every bin before a KL divergence.
pub const DEFAULT_SMOOTHING: f64 = 1e-8;

/// A probability distribution over a discrete action set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no actions".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("mass {total} != 1")));
        }
        Ok(Self { probs })
    }

    pub fn one_hot(action_count: usize, action: usize) -> Self {
        assert!(action < action_count, "action {action} outside 0..{action_count}");
        let mut probs = vec![0.0; action_count];
        probs[action] = 1.0;
        Self { probs }
    }

    pub fn uniform(action_count: usize) -> Self {
        assert!(action_count > 0);
        Self { probs: vec![1.0 / action_count as f64; action_count] }
    }

    /// Normalises a non-negative weight vector with positive total mass.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidDistribution("weights must be non-negative with positive mass".into()));
        }
        Ok(Self { probs: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn action_count(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Additively smooths every bin by `eps` and renormalises.
    pub fn smoothed(&self, eps: f64) -> Vec<f64> {
        let denom = 1.0 + eps * self.probs.len() as f64;
        self.probs.iter().map(|p| (p + eps) / denom).collect()
    }
}

impl TryFrom<Vec<f64>> for ActionDistribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ActionDistribution> for Vec<f64> {
    fn from(d: ActionDistribution) -> Self {
        d.probs
    }
}

/// Symmetric Kullback-Leibler divergence `KL(p||q) + KL(q||p)` of the
/// `eps`-smoothed distributions.
///
/// Evaluated as `sum (p_i - q_i)(ln p_i - ln q_i)`: every term is non-negative
/// and swapping the arguments flips both factors, so the result is exactly
/// symmetric in floating point.
pub fn symmetric_kl(p: &ActionDistribution, q: &ActionDistribution, eps: f64) -> Result<f64> {
    if p.action_count() != q.action_count() {
        return Err(Error::DimensionMismatch { expected: p.action_count(), actual: q.action_count() });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("smoothing must be positive, got {eps}")));
    }
    let ps = p.smoothed(eps);
    let qs = q.smoothed(eps);
    Ok(ps.iter().zip(&qs).map(|(a, b)| (a - b) * (a.ln() - b.ln())).sum())
}

/// Assignment of each action index to a coarse semantic group (move, attack, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SemanticGrouping {
    group_of: Vec<usize>,
    group_count: usize,
}

impl SemanticGrouping {
    /// Builds a grouping from the group index of every action. Group indices
    /// must cover `0..group_count` without gaps.
    pub fn new(group_of: Vec<usize>) -> Result<Self> {
        if group_of.is_empty() {
            return Err(Error::InvalidArgument("grouping over zero actions".into()));
        }
        let group_count = group_of.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; group_count];
        for g in &group_of {
            seen[*g] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("group indices must be contiguous from 0".into()));
        }
        Ok(Self { group_of, group_count })
    }

    pub fn identity(action_count: usize) -> Self {
        Self { group_of: (0..action_count).collect(), group_count: action_count }
    }

    pub fn action_count(&self) -> usize {
        self.group_of.len()
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn group_of(&self, action: usize) -> usize {
        self.group_of[action]
    }
}

impl TryFrom<Vec<usize>> for SemanticGrouping {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SemanticGrouping> for Vec<usize> {
    fn from(g: SemanticGrouping) -> Self {
        g.group_of
    }
}

/// Aggregates action mass into semantic groups.
pub fn semantic_projection(d: &ActionDistribution, g: &SemanticGrouping) -> Result<ActionDistribution> {
    if d.action_count() != g.action_count() {
        return Err(Error::DimensionMismatch { expected: g.action_count(), actual: d.action_count() });
    }
    let mut out = vec![0.0; g.group_count()];
    for (a, p) in d.probs().iter().enumerate() {
        out[g.group_of(a)] += p;
    }
    Ok(ActionDistribution { probs: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> ActionDistribution {
        ActionDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(ActionDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ActionDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(ActionDistribution::new(vec![]).is_err());
    }

    #[test]
    fn kl_of_identical_is_zero() {
        let p = dist(&[0.3, 0.7]);
        assert_eq!(symmetric_kl(&p, &p, DEFAULT_SMOOTHING).unwrap(), 0.0);
    }

    #[test]
    fn kl_reference_value() {
        // 0.5 ln(0.5/0.9) + 0.5 ln(0.5/0.1) + 0.9 ln(0.9/0.5) + 0.1 ln(0.1/0.5)
        let v = symmetric_kl(&dist(&[0.5, 0.5]), &dist(&[0.9, 0.1]), 1e-14).unwrap();
        assert!((v - 0.878_889_830_934_487_8).abs() < 1e-9, "{v}");
    }

    #[test]
    fn kl_disjoint_support_is_finite_and_symmetric() {
        let p = dist(&[1.0, 0.0]);
        let q = dist(&[0.0, 1.0]);
        let a = symmetric_kl(&p, &q, 1e-6).unwrap();
        let b = symmetric_kl(&q, &p, 1e-6).unwrap();
        assert!(a.is_finite() && a > 20.0);
        assert_eq!(a, b);
    }

    #[test]
    fn kl_dimension_mismatch() {
        let err = symmetric_kl(&dist(&[1.0]), &dist(&[0.5, 0.5]), 1e-8).unwrap_err();
        assert_eq!(err.kind(), "dimension-mismatch");
    }

    #[test]
    fn projection_examples() {
        let g = SemanticGrouping::new(vec![0, 0, 1]).unwrap();
        let p = semantic_projection(&dist(&[0.2, 0.3, 0.5]), &g).unwrap();
        assert!((p.probs()[0] - 0.5).abs() < 1e-15 && (p.probs()[1] - 0.5).abs() < 1e-15);
        let p = semantic_projection(&ActionDistribution::one_hot(3, 1), &g).unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0]);
        let d = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(semantic_projection(&d, &SemanticGrouping::identity(3)).unwrap(), d);
    }

    #[test]
    fn grouping_requires_contiguous_groups() {
        assert!(SemanticGrouping::new(vec![0, 2]).is_err());
        assert_eq!(SemanticGrouping::new(vec![1, 0, 1]).unwrap().group_count(), 2);
    }
}
