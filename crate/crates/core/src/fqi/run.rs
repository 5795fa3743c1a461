use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mdp::{FiniteMDPSpec, ValueTable};
use crate::{Error, Result};

/// Function class the regression step fits within.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum HypothesisSpace {
    ExactTabular,
    /// Observations are merged onto `k` super-states; `map[z]` is the super-state of `z`.
    /// Without a map, observation `z` of `S` goes to `z * k / S`.
    Aggregated {
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<Vec<usize>>,
    },
}

impl HypothesisSpace {
    pub fn label(&self) -> String {
        match self {
            HypothesisSpace::ExactTabular => "exact".into(),
            HypothesisSpace::Aggregated { k, .. } => format!("aggregated_{k}"),
        }
    }

    /// Super-state of every observation for a table with `states` rows.
    pub fn cells(&self, states: usize) -> Result<Vec<usize>> {
        match self {
            HypothesisSpace::ExactTabular => Ok((0..states).collect()),
            HypothesisSpace::Aggregated { k, map } => {
                if *k == 0 || *k > states {
                    return Err(Error::BadParams(format!("cannot aggregate {states} observations onto {k} cells")));
                }
                let Some(map) = map else {
                    return Ok((0..states).map(|z| z * k / states).collect());
                };
                if map.len() != states {
                    return Err(Error::DimensionMismatch { expected: states, actual: map.len() });
                }
                let mut hit = vec![false; *k];
                for c in map {
                    match hit.get_mut(*c) {
                        Some(h) => *h = true,
                        None => return Err(Error::BadParams(format!("super-state {c} out of range 0..{k}"))),
                    }
                }
                if hit.contains(&false) {
                    return Err(Error::BadParams("aggregation map must be onto".into()));
                }
                Ok(map.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FqiMode {
    /// One table per agent fitted on that agent's samples.
    Separate,
    /// One table fitted on the pooled samples of all agents.
    Shared,
}

impl FqiMode {
    pub fn name(self) -> &'static str {
        match self {
            FqiMode::Separate => "separate",
            FqiMode::Shared => "shared",
        }
    }
}

/// Distribution the regression samples `(z, u)` are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SamplingDistribution {
    #[default]
    Uniform,
    /// Observation `z` is drawn with weight `decay^z`; actions stay uniform.
    Skewed { decay: f64 },
}

impl SamplingDistribution {
    /// Probability of every `(z, u)` cell, row-major.
    pub fn weights(&self, states: usize, actions: usize) -> Result<Vec<f64>> {
        let per_state: Vec<f64> = match *self {
            SamplingDistribution::Uniform => vec![1.0; states],
            SamplingDistribution::Skewed { decay } => {
                if !(decay > 0.0 && decay <= 1.0) {
                    return Err(Error::BadParams(format!("skew decay must lie in (0, 1], got {decay}")));
                }
                (0..states).map(|z| decay.powi(z as i32)).collect()
            }
        };
        let total: f64 = per_state.iter().sum::<f64>() * actions as f64;
        Ok(per_state.iter().flat_map(|w| std::iter::repeat_n(w / total, actions)).collect())
    }
}

/// Iterates `Q~_0 .. Q~_T`; `iterates[t][i]` is agent `i`'s table after `t` fits.
#[derive(Debug, Clone, PartialEq)]
pub struct FqiRun {
    pub mode: FqiMode,
    pub hypothesis: HypothesisSpace,
    pub samples: usize,
    pub sampling: SamplingDistribution,
    pub seed: u64,
    pub iterates: Vec<Vec<ValueTable>>,
}

impl FqiRun {
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last(&self) -> &[ValueTable] {
        self.iterates.last().expect("run holds the initial iterate")
    }
}

struct Sampler {
    cells: WeightedIndex<f64>,
    next: Vec<WeightedIndex<f64>>,
}

/// Fitted Q-iteration from the zero table. Every iteration draws `samples`
/// i.i.d. transitions per agent and replaces each hypothesis cell by the mean
/// of its regression targets; cells without samples keep the previous value.
pub fn fqi_run(
    spec: &FiniteMDPSpec,
    hypothesis: &HypothesisSpace,
    mode: FqiMode,
    samples: usize,
    iterations: usize,
    sampling: SamplingDistribution,
    seed: u64,
) -> Result<FqiRun> {
    spec.validate()?;
    if samples == 0 {
        return Err(Error::BadParams("sample size must be at least 1".into()));
    }
    if mode == FqiMode::Shared && !spec.is_uniform() {
        return Err(Error::BadParams("shared mode needs agents with identical dimensions".into()));
    }
    let cells: Vec<Vec<usize>> = spec.agents.iter().map(|a| hypothesis.cells(a.states())).collect::<Result<_>>()?;
    let samplers: Vec<Sampler> = spec
        .agents
        .iter()
        .map(|a| {
            let w = sampling.weights(a.states(), a.actions())?;
            let next = a
                .kernel
                .iter()
                .flatten()
                .map(|row| WeightedIndex::new(row).map_err(|e| Error::BadKernel(e.to_string())))
                .collect::<Result<_>>()?;
            Ok(Sampler { cells: WeightedIndex::new(&w).map_err(|e| Error::BadParams(e.to_string()))?, next })
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables = match mode {
        FqiMode::Separate => spec.agents.len(),
        FqiMode::Shared => 1,
    };
    let zero: Vec<ValueTable> = spec.agents.iter().map(|a| ValueTable::zeros(a.states(), a.actions())).collect();
    let mut current: Vec<ValueTable> = zero[..tables].to_vec();
    let mut iterates = vec![expand(&current, spec.agents.len())];
    for _ in 0..iterations {
        let mut sums: Vec<Vec<(f64, usize)>> = current.iter().map(|q| vec![(0.0, 0); q.values.len()]).collect();
        for (i, agent) in spec.agents.iter().enumerate() {
            let t = if mode == FqiMode::Shared { 0 } else { i };
            let prev = &current[t];
            let sampler = &samplers[i];
            let actions = agent.actions();
            for _ in 0..samples {
                let c = sampler.cells.sample(&mut rng);
                let (z, u) = (c / actions, c % actions);
                let z2 = sampler.next[c].sample(&mut rng);
                let noise =
                    if spec.reward_noise > 0.0 { spec.reward_noise * (2.0 * rng.gen::<f64>() - 1.0) } else { 0.0 };
                let y = agent.reward[z][u] + noise + spec.gamma * prev.max(z2);
                let slot = &mut sums[t][cells[i][z] * actions + u];
                slot.0 += y;
                slot.1 += 1;
            }
        }
        current = current
            .iter()
            .enumerate()
            .map(|(t, prev)| {
                let mut q = prev.clone();
                let map = &cells[t];
                for z in 0..q.states {
                    for u in 0..q.actions {
                        let (sum, count) = sums[t][map[z] * q.actions + u];
                        if count > 0 {
                            q.set(z, u, sum / count as f64);
                        }
                    }
                }
                q
            })
            .collect();
        iterates.push(expand(&current, spec.agents.len()));
    }
    Ok(FqiRun { mode, hypothesis: hypothesis.clone(), samples, sampling, seed, iterates })
}

fn expand(tables: &[ValueTable], agents: usize) -> Vec<ValueTable> {
    if tables.len() == agents {
        tables.to_vec()
    } else {
        vec![tables[0].clone(); agents]
    }
}
