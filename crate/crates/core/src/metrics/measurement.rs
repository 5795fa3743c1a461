use serde::{Deserialize, Serialize};

use super::diversity::ContributionNormalization;
use super::timeseries::{
    diversity_timeseries, episode_max_contribution, DiversityTimeSeries, MetricKind, MetricsConfig,
};
use crate::episode::EpisodeLog;
use crate::{Error, Result};

/// Where a measurement came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub scenario: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub episodes: usize,
}

/// The task-level diversity scalars used for diagnosis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskMeasurement {
    pub action_semantic: f64,
    pub action_real: f64,
    pub trajectory_overlap: f64,
    pub contribution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl TaskMeasurement {
    pub fn new(action_semantic: f64, action_real: f64, trajectory_overlap: f64, contribution: f64) -> Result<Self> {
        let m = Self { action_semantic, action_real, trajectory_overlap, contribution, provenance: None };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, unit: bool| {
            if !v.is_finite() || v < 0.0 || (unit && v > 1.0) {
                let range = if unit { "[0, 1]" } else { "[0, inf)" };
                return Err(Error::InvalidArgument(format!("{name} = {v} outside {range}")));
            }
            Ok(())
        };
        check("action_semantic", self.action_semantic, false)?;
        check("action_real", self.action_real, false)?;
        check("trajectory_overlap", self.trajectory_overlap, true)?;
        check("contribution", self.contribution, true)
    }
}

/// How a per-tick series collapses to one number per episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducer {
    #[default]
    TimeMean,
    EpisodeEnd,
    EpisodeMax,
}

impl Reducer {
    pub fn apply(self, s: &DiversityTimeSeries) -> Option<f64> {
        match self {
            Reducer::TimeMean => s.mean(),
            Reducer::EpisodeEnd => s.last(),
            Reducer::EpisodeMax => s.max(),
        }
    }
}

/// Which per-agent values feed the contribution scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContributionSource {
    /// Each agent's largest chosen-action value over the episode.
    #[default]
    EpisodeMax,
    /// The per-tick series, reduced like the other metrics.
    PerStep,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementConfig {
    pub metrics: MetricsConfig,
    pub reducer: Reducer,
    pub contribution_source: ContributionSource,
}

/// Episode-averaged diversity scalars over a set of logs. Episodes whose
/// series is empty for a metric (never two active agents) are skipped for
/// that metric; a metric with no usable episode is reported as 0.
pub fn task_measurement(logs: &[EpisodeLog], cfg: &MeasurementConfig) -> Result<TaskMeasurement> {
    if logs.is_empty() {
        return Err(Error::NoLogs);
    }
    let mut acc = [(0.0, 0usize); 4];
    for log in logs {
        for (k, kind) in MetricKind::ALL.into_iter().enumerate() {
            let v = if kind == MetricKind::Contribution && cfg.contribution_source == ContributionSource::EpisodeMax {
                episode_max_contribution(log, cfg.metrics.contribution_normalization)?
            } else {
                cfg.reducer.apply(&diversity_timeseries(log, kind, &cfg.metrics)?)
            };
            if let Some(v) = v {
                acc[k].0 += v;
                acc[k].1 += 1;
            }
        }
    }
    let avg = |k: usize| if acc[k].1 == 0 { 0.0 } else { acc[k].0 / acc[k].1 as f64 };
    let mut seeds: Vec<u64> = logs.iter().map(|l| l.header.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let m = TaskMeasurement {
        action_real: avg(0),
        action_semantic: avg(1),
        trajectory_overlap: avg(2).clamp(0.0, 1.0),
        contribution: avg(3).clamp(0.0, 1.0),
        provenance: Some(Provenance {
            scenario: logs[0].header.scenario.clone(),
            config_hash: logs[0].header.config_hash.clone(),
            seeds,
            episodes: logs.len(),
        }),
    };
    m.validate()?;
    Ok(m)
}

/// Episode-max contribution diversity under a chosen normalisation, averaged over episodes.
pub fn contribution_with(logs: &[EpisodeLog], norm: ContributionNormalization) -> Result<f64> {
    if logs.is_empty() {
        return Err(Error::NoLogs);
    }
    let mut vals = Vec::with_capacity(logs.len());
    for l in logs {
        vals.extend(episode_max_contribution(l, norm)?);
    }
    Ok(if vals.is_empty() { 0.0 } else { vals.iter().sum::<f64>() / vals.len() as f64 })
}
