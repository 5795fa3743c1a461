use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mdp::{value_iteration_oracle, AgentMdp, FiniteMDPSpec, OracleSolution};
use super::report::{decompose, DecompositionReport, EvaluationDistribution};
use super::run::{fqi_run, FqiMode, HypothesisSpace, SamplingDistribution};
use crate::stats::{mean, sd};
use crate::{Error, Result};

/// Random MDPs sharing one transition kernel whose agent rewards drift apart
/// as the diversity knob goes from 0 (clones) to 1 (independent rewards).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MdpFamily {
    pub agents: usize,
    pub states: usize,
    pub actions: usize,
    pub gamma: f64,
    pub reward_bound: f64,
    pub reward_noise: f64,
    /// Joint reward weights; uniform when absent.
    pub mix: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for MdpFamily {
    fn default() -> Self {
        Self { agents: 2, states: 3, actions: 2, gamma: 0.9, reward_bound: 1.0, reward_noise: 0.0, mix: None, seed: 0 }
    }
}

impl MdpFamily {
    pub fn instance(&self, diversity: f64) -> Result<FiniteMDPSpec> {
        if !(0.0..=1.0).contains(&diversity) {
            return Err(Error::BadParams(format!("diversity must lie in [0, 1], got {diversity}")));
        }
        if self.agents == 0 || self.states == 0 || self.actions == 0 {
            return Err(Error::BadParams("family dimensions must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (s, a) = (self.states, self.actions);
        let kernel: Vec<Vec<Vec<f64>>> = (0..s)
            .map(|_| {
                (0..a)
                    .map(|_| {
                        let raw: Vec<f64> = (0..s).map(|_| rng.gen::<f64>() + 1e-3).collect();
                        let t: f64 = raw.iter().sum();
                        raw.iter().map(|x| x / t).collect()
                    })
                    .collect()
            })
            .collect();
        let top = self.reward_bound - self.reward_noise;
        let table = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..s).map(|_| (0..a).map(|_| top * rng.gen::<f64>()).collect()).collect()
        };
        let base = table(&mut rng);
        let agents = (0..self.agents)
            .map(|_| {
                let own = table(&mut rng);
                let reward = base
                    .iter()
                    .zip(&own)
                    .map(|(b, o)| {
                        b.iter()
                            .zip(o)
                            .map(|(x, y)| if diversity == 0.0 { *x } else { (1.0 - diversity) * x + diversity * y })
                            .collect()
                    })
                    .collect();
                AgentMdp { kernel: kernel.clone(), reward }
            })
            .collect();
        let spec = FiniteMDPSpec {
            agents,
            mix: self.mix.clone().unwrap_or_else(|| vec![1.0 / self.agents as f64; self.agents]),
            gamma: self.gamma,
            reward_bound: self.reward_bound,
            shared_reward: diversity == 0.0,
            reward_noise: self.reward_noise,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Where the MDPs of a sweep come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum MdpSource {
    Family(MdpFamily),
    Explicit { spec: FiniteMDPSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub samples: Vec<usize>,
    pub iterations: Vec<usize>,
    pub modes: Vec<FqiMode>,
    pub hypotheses: Vec<HypothesisSpace>,
    /// Diversity knob values; only used with a family source.
    pub diversity: Vec<f64>,
    pub seeds: Vec<u64>,
    pub sampling: SamplingDistribution,
    pub evaluation: EvaluationDistribution,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            samples: vec![1000],
            iterations: vec![30],
            modes: vec![FqiMode::Separate],
            hypotheses: vec![HypothesisSpace::ExactTabular],
            diversity: vec![0.0],
            seeds: (1..=8).collect(),
            sampling: SamplingDistribution::Uniform,
            evaluation: EvaluationDistribution::Uniform,
        }
    }
}

/// Mean and sample standard deviation over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    fn of(xs: &[f64]) -> Self {
        Self { mean: mean(xs), sd: sd(xs) }
    }
}

/// One grid point aggregated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub diversity: Option<f64>,
    pub mode: FqiMode,
    pub hypothesis: String,
    pub samples: usize,
    pub iterations: usize,
    pub seeds: usize,
    pub excess_risk: Summary,
    pub var_term: Summary,
    pub sharing_bias: Summary,
    pub approx_proxy: Summary,
    pub concentration_proxy: Summary,
    pub algorithmic_term: Summary,
    pub bound: Summary,
    pub sup_error: Summary,
}

impl SweepRow {
    pub const FIELDS: [&'static str; 8] = [
        "excess_risk",
        "var_term",
        "sharing_bias",
        "approx_proxy",
        "concentration_proxy",
        "algorithmic_term",
        "bound",
        "sup_error",
    ];

    pub fn summaries(&self) -> [Summary; 8] {
        [
            self.excess_risk,
            self.var_term,
            self.sharing_bias,
            self.approx_proxy,
            self.concentration_proxy,
            self.algorithmic_term,
            self.bound,
            self.sup_error,
        ]
    }

    fn from_reports(diversity: Option<f64>, reports: &[DecompositionReport]) -> Self {
        let col = |f: fn(&DecompositionReport) -> f64| Summary::of(&reports.iter().map(f).collect::<Vec<_>>());
        let r = &reports[0];
        Self {
            diversity,
            mode: r.mode,
            hypothesis: r.hypothesis.clone(),
            samples: r.samples,
            iterations: r.iterations,
            seeds: reports.len(),
            excess_risk: col(|r| r.excess_risk),
            var_term: col(|r| r.var_term),
            sharing_bias: col(|r| r.sharing_bias),
            approx_proxy: col(|r| r.approx_proxy),
            concentration_proxy: col(|r| r.concentration_proxy),
            algorithmic_term: col(|r| r.algorithmic_term),
            bound: col(|r| r.bound),
            sup_error: col(|r| r.sup_error),
        }
    }
}

struct Point<'a> {
    diversity: Option<f64>,
    spec: &'a FiniteMDPSpec,
    oracle: &'a OracleSolution,
    mode: FqiMode,
    hypothesis: &'a HypothesisSpace,
    samples: usize,
    iterations: usize,
}

/// Runs every grid point for every seed and aggregates the reports; rows
/// follow the grid order diversity, mode, hypothesis, samples, iterations.
pub fn sweep(source: &MdpSource, grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    if grid.seeds.is_empty()
        || grid.samples.is_empty()
        || grid.iterations.is_empty()
        || grid.modes.is_empty()
        || grid.hypotheses.is_empty()
    {
        return Err(Error::BadParams("every sweep axis needs at least one value".into()));
    }
    let specs: Vec<(Option<f64>, FiniteMDPSpec)> = match source {
        MdpSource::Family(f) => {
            if grid.diversity.is_empty() {
                return Err(Error::BadParams("a family sweep needs diversity values".into()));
            }
            grid.diversity.iter().map(|d| Ok((Some(*d), f.instance(*d)?))).collect::<Result<_>>()?
        }
        MdpSource::Explicit { spec } => vec![(None, spec.clone())],
    };
    let oracles: Vec<OracleSolution> = specs.iter().map(|(_, s)| value_iteration_oracle(s)).collect::<Result<_>>()?;
    let mut points = Vec::new();
    for ((diversity, spec), oracle) in specs.iter().zip(&oracles) {
        for &mode in &grid.modes {
            for hypothesis in &grid.hypotheses {
                for &samples in &grid.samples {
                    for &iterations in &grid.iterations {
                        points.push(Point {
                            diversity: *diversity,
                            spec,
                            oracle,
                            mode,
                            hypothesis,
                            samples,
                            iterations,
                        });
                    }
                }
            }
        }
    }
    let tasks: Vec<(usize, u64)> = (0..points.len()).flat_map(|p| grid.seeds.iter().map(move |s| (p, *s))).collect();
    let run = |&(p, seed): &(usize, u64)| -> Result<DecompositionReport> {
        let pt = &points[p];
        let r = fqi_run(pt.spec, pt.hypothesis, pt.mode, pt.samples, pt.iterations, grid.sampling, seed)?;
        decompose(pt.spec, pt.oracle, &r, &grid.evaluation)
    };
    #[cfg(feature = "parallel")]
    let reports: Vec<DecompositionReport> = {
        use rayon::prelude::*;
        tasks.par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let reports: Vec<DecompositionReport> = tasks.iter().map(run).collect::<Result<_>>()?;
    Ok(reports
        .chunks(grid.seeds.len())
        .zip(&points)
        .map(|(chunk, pt)| SweepRow::from_reports(pt.diversity, chunk))
        .collect())
}
