use serde::{Deserialize, Serialize};

use super::mdp::{averaged_backup, FiniteMDPSpec, OracleSolution, ValueTable};
use super::run::{FqiMode, FqiRun, HypothesisSpace, SamplingDistribution};
use super::weights::fit_credit_weights;
use crate::{Error, Result};

/// Evaluation distribution over the joint observation-action support.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum EvaluationDistribution {
    #[default]
    Uniform,
    /// One probability per joint cell, indexed `state * joint_actions + action`.
    Weights { weights: Vec<f64> },
}

impl EvaluationDistribution {
    pub fn probabilities(&self, cells: usize) -> Result<Vec<f64>> {
        match self {
            EvaluationDistribution::Uniform => Ok(vec![1.0 / cells as f64; cells]),
            EvaluationDistribution::Weights { weights } => {
                if weights.len() != cells {
                    return Err(Error::SupportMismatch(format!(
                        "mu has {} cells, joint support has {cells}",
                        weights.len()
                    )));
                }
                let s: f64 = weights.iter().sum();
                if weights.iter().any(|w| !(*w >= 0.0)) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::SupportMismatch("mu must be a probability vector".into()));
                }
                Ok(weights.clone())
            }
        }
    }
}

/// Measured terms of the excess-risk bound for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub mode: FqiMode,
    pub hypothesis: String,
    pub samples: usize,
    pub iterations: usize,
    /// Excess risk of the fitted mixture over the best mixture of optimal values.
    pub excess_risk: f64,
    pub var_term: f64,
    pub sharing_bias: f64,
    /// Projection residual of the backup of the final iterate; a stand-in for the hypothesis-space error.
    pub approx_proxy: f64,
    /// Occupancy-to-sampling density ratio of the optimal policy; a stand-in for the concentration coefficient.
    pub concentration_proxy: f64,
    pub algorithmic_term: f64,
    /// Sum of the measured terms with the approximation term scaled by its coefficient.
    pub bound: f64,
    /// Largest absolute gap between the final iterate and each agent's optimal table.
    pub sup_error: f64,
    pub fitted_weights: Vec<f64>,
    pub optimal_weights: Vec<f64>,
}

/// `4 gamma^(T+1) M / (1 - gamma)^2`.
pub fn algorithmic_term(gamma: f64, iterations: usize, reward_bound: f64) -> f64 {
    let power = (0..=iterations).fold(1.0, |p, _| p * gamma);
    4.0 * power * reward_bound / ((1.0 - gamma) * (1.0 - gamma))
}

/// Decomposes the final iterate of `run`.
pub fn decompose(
    spec: &FiniteMDPSpec,
    oracle: &OracleSolution,
    run: &FqiRun,
    mu: &EvaluationDistribution,
) -> Result<DecompositionReport> {
    let ctx = Estimates {
        mode: run.mode,
        hypothesis: &run.hypothesis,
        samples: run.samples,
        iterations: run.iterations(),
        sampling: run.sampling,
    };
    decompose_estimates(spec, oracle, run.last(), &ctx, mu)
}

/// Description of where a set of estimates came from.
#[derive(Debug, Clone, Copy)]
pub struct Estimates<'a> {
    pub mode: FqiMode,
    pub hypothesis: &'a HypothesisSpace,
    pub samples: usize,
    pub iterations: usize,
    pub sampling: SamplingDistribution,
}

/// Decomposes arbitrary per-agent estimates, e.g. the exact optimal tables.
pub fn decompose_estimates(
    spec: &FiniteMDPSpec,
    oracle: &OracleSolution,
    estimates: &[ValueTable],
    ctx: &Estimates,
    mu: &EvaluationDistribution,
) -> Result<DecompositionReport> {
    let n = spec.agent_count();
    if estimates.len() != n || oracle.agents.len() != n {
        return Err(Error::SupportMismatch(format!(
            "{} estimates and {} oracle tables for {n} agents",
            estimates.len(),
            oracle.agents.len()
        )));
    }
    for (e, a) in estimates.iter().zip(&spec.agents) {
        if e.states != a.states() || e.actions != a.actions() {
            return Err(Error::SupportMismatch("estimate table shape differs from the agent's".into()));
        }
    }
    let support = spec.support();
    if oracle.joint.len() != support.len() {
        return Err(Error::SupportMismatch(format!(
            "joint oracle has {} cells, support {}",
            oracle.joint.len(),
            support.len()
        )));
    }
    let mu = mu.probabilities(support.len())?;
    let gamma = spec.gamma;

    let fitted = support.evaluate(&estimates.iter().collect::<Vec<_>>());
    let optimal = support.evaluate(&oracle.agents.iter().collect::<Vec<_>>());
    let w_hat = fit_credit_weights(&fitted, &oracle.joint, &mu)?.weights;
    let w_star = fit_credit_weights(&optimal, &oracle.joint, &mu)?.weights;
    let l1 = |q: &[Vec<f64>], w: &[f64]| -> f64 {
        (0..support.len())
            .map(|k| {
                let mix: f64 = w.iter().zip(q).map(|(wi, qi)| wi * qi[k]).sum();
                mu[k] * (oracle.joint[k] - mix).abs()
            })
            .sum()
    };
    let excess_risk = l1(&fitted, &w_hat) - l1(&optimal, &w_star);

    let shared = ctx.mode == FqiMode::Shared;
    let averaged = if shared {
        let a = oracle
            .averaged
            .as_ref()
            .ok_or_else(|| Error::SupportMismatch("shared mode needs the averaged oracle".into()))?;
        Some(support.evaluate(&vec![a; n]))
    } else {
        None
    };
    let reference = averaged.as_ref().unwrap_or(&optimal);
    let weight_gap = w_star.iter().zip(&w_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let spread: f64 = (0..support.len())
        .map(|k| {
            let m = reference.iter().map(|q| q[k]).sum::<f64>() / n as f64;
            let var = reference.iter().map(|q| (q[k] - m).powi(2)).sum::<f64>() / n as f64;
            mu[k] * var.sqrt()
        })
        .sum();
    let var_term = (n as f64).sqrt() * weight_gap * spread;
    let sharing_bias = match &averaged {
        Some(bar) => (0..support.len())
            .map(|k| mu[k] * w_star.iter().enumerate().map(|(i, w)| w * (optimal[i][k] - bar[i][k])).sum::<f64>().abs())
            .sum(),
        None => 0.0,
    };

    let approx_proxy = approximation_proxy(spec, estimates, ctx)?;
    let concentration_proxy = concentration_proxy(spec, oracle, ctx, &mu)?;
    let algorithmic = algorithmic_term(gamma, ctx.iterations, spec.reward_bound);
    let bound = var_term
        + sharing_bias
        + 4.0 * concentration_proxy * gamma / (1.0 - gamma).powi(2) * approx_proxy
        + algorithmic;
    let sup_error = estimates.iter().zip(&oracle.agents).fold(0f64, |m, (e, o)| m.max(e.sup_distance(o)));

    Ok(DecompositionReport {
        mode: ctx.mode,
        hypothesis: ctx.hypothesis.label(),
        samples: ctx.samples,
        iterations: ctx.iterations,
        excess_risk,
        var_term,
        sharing_bias,
        approx_proxy,
        concentration_proxy,
        algorithmic_term: algorithmic,
        bound,
        sup_error,
        fitted_weights: w_hat,
        optimal_weights: w_star,
    })
}

/// Root mean over agents of `|| Pi_H(T Q) - T Q ||_{2,nu}` at the given tables.
fn approximation_proxy(spec: &FiniteMDPSpec, estimates: &[ValueTable], ctx: &Estimates) -> Result<f64> {
    let mut total = 0.0;
    for (i, agent) in spec.agents.iter().enumerate() {
        let target = match ctx.mode {
            FqiMode::Separate => agent.backup(&estimates[i], spec.gamma),
            FqiMode::Shared => averaged_backup(spec, &estimates[i]),
        };
        let nu = ctx.sampling.weights(agent.states(), agent.actions())?;
        let map = ctx.hypothesis.cells(agent.states())?;
        let a = agent.actions();
        let k = map.iter().max().map_or(0, |m| m + 1);
        let mut mass = vec![(0.0, 0.0); k * a];
        for z in 0..agent.states() {
            for u in 0..a {
                let slot = &mut mass[map[z] * a + u];
                slot.0 += nu[z * a + u] * target.get(z, u);
                slot.1 += nu[z * a + u];
            }
        }
        for z in 0..agent.states() {
            for u in 0..a {
                let (s, w) = mass[map[z] * a + u];
                let projected = if w > 0.0 { s / w } else { target.get(z, u) };
                total += nu[z * a + u] * (projected - target.get(z, u)).powi(2);
            }
        }
    }
    Ok((total / spec.agent_count() as f64).sqrt())
}

/// `max_i max_(z,u) rho_i(z,u) / nu_i(z,u)` where `rho_i` is the discounted
/// occupancy of agent `i`'s optimal policy started from its marginal of `mu`.
fn concentration_proxy(spec: &FiniteMDPSpec, oracle: &OracleSolution, ctx: &Estimates, mu: &[f64]) -> Result<f64> {
    let support = spec.support();
    let gamma = spec.gamma;
    let mut worst = 0f64;
    for (i, agent) in spec.agents.iter().enumerate() {
        let (s, a) = (agent.states(), agent.actions());
        let q = match (ctx.mode, &oracle.averaged) {
            (FqiMode::Shared, Some(bar)) => bar,
            _ => &oracle.agents[i],
        };
        let mut start = vec![0.0; s * a];
        for (k, m) in mu.iter().enumerate() {
            let (z, u) = support.cell(k)[i];
            start[z * a + u] += m;
        }
        let mut occupancy = vec![0.0; s * a];
        let mut current = start;
        let mut weight = 1.0 - gamma;
        while weight > 1e-14 {
            for (o, c) in occupancy.iter_mut().zip(&current) {
                *o += weight * c;
            }
            let mut next = vec![0.0; s * a];
            for z in 0..s {
                for u in 0..a {
                    let m = current[z * a + u];
                    if m == 0.0 {
                        continue;
                    }
                    for (z2, p) in agent.kernel[z][u].iter().enumerate() {
                        next[z2 * a + q.argmax(z2)] += m * p;
                    }
                }
            }
            current = next;
            weight *= gamma;
        }
        let nu = ctx.sampling.weights(s, a)?;
        for (o, v) in occupancy.iter().zip(&nu) {
            if *o > 0.0 {
                worst = worst.max(o / v);
            }
        }
    }
    Ok(worst)
}
