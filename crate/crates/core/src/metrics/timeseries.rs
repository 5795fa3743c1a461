use serde::{Deserialize, Serialize};

use super::distribution::{semantic_projection, symmetric_kl, ActionDistribution, SemanticGrouping, DEFAULT_SMOOTHING};
use super::diversity::{
    clipped_window, contribution_distance_with, role_diversity, window_mean, ContributionNormalization,
    PairwiseDistanceMatrix,
};
use super::overlap::overlap_fraction;
use crate::episode::EpisodeLog;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    ActionReal,
    ActionSemantic,
    TrajectoryOverlap,
    Contribution,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] =
        [MetricKind::ActionReal, MetricKind::ActionSemantic, MetricKind::TrajectoryOverlap, MetricKind::Contribution];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::ActionReal => "action_real",
            MetricKind::ActionSemantic => "action_semantic",
            MetricKind::TrajectoryOverlap => "trajectory_overlap",
            MetricKind::Contribution => "contribution",
        }
    }

    /// Whether values are normalised into `[0, 1]`.
    pub fn is_unit_interval(self) -> bool {
        matches!(self, MetricKind::TrajectoryOverlap | MetricKind::Contribution)
    }
}

/// Knobs shared by every metric computed from episode logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    /// Half window of the action profile; `None` uses half the episode length.
    pub half_window: Option<usize>,
    pub smoothing: f64,
    /// Overrides the grouping stored in the log header.
    pub grouping: Option<SemanticGrouping>,
    pub contribution_normalization: ContributionNormalization,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            half_window: None,
            smoothing: DEFAULT_SMOOTHING,
            grouping: None,
            contribution_normalization: ContributionNormalization::default(),
        }
    }
}

/// Per-tick diversity; `None` marks ticks with fewer than two active agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityTimeSeries {
    pub metric_kind: MetricKind,
    pub values: Vec<(usize, Option<f64>)>,
}

impl DiversityTimeSeries {
    pub fn present(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().filter_map(|(_, v)| *v)
    }

    pub fn mean(&self) -> Option<f64> {
        let (sum, n) = self.present().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    pub fn max(&self) -> Option<f64> {
        self.present().reduce(f64::max)
    }

    pub fn last(&self) -> Option<f64> {
        self.values.iter().rev().find_map(|(_, v)| *v)
    }
}

/// Builds the per-tick role diversity of one episode.
pub fn diversity_timeseries(log: &EpisodeLog, kind: MetricKind, cfg: &MetricsConfig) -> Result<DiversityTimeSeries> {
    let values = match kind {
        MetricKind::ActionReal => action_series(log, None, cfg)?,
        MetricKind::ActionSemantic => {
            let g = cfg
                .grouping
                .as_ref()
                .or(log.header.semantic_groups.as_ref())
                .ok_or(Error::MissingChannel("semantic_groups"))?;
            action_series(log, Some(g), cfg)?
        }
        MetricKind::TrajectoryOverlap => trajectory_series(log)?,
        MetricKind::Contribution => contribution_series(log, cfg.contribution_normalization)?,
    };
    Ok(DiversityTimeSeries { metric_kind: kind, values })
}

fn active(log: &EpisodeLog, t: usize) -> Vec<usize> {
    log.records[t].agents.iter().enumerate().filter(|(_, a)| a.alive).map(|(i, _)| i).collect()
}

fn diversity_over(active: &[usize], mut dist: impl FnMut(usize, usize) -> Result<f64>) -> Result<Option<f64>> {
    if active.len() < 2 {
        return Ok(None);
    }
    let m = PairwiseDistanceMatrix::from_pairs(active.len(), |i, j| dist(active[i], active[j]))?;
    Ok(Some(role_diversity(&m)))
}

fn action_series(
    log: &EpisodeLog,
    grouping: Option<&SemanticGrouping>,
    cfg: &MetricsConfig,
) -> Result<Vec<(usize, Option<f64>)>> {
    let len = log.len();
    let agents = log.header.agent_count;
    // per agent, per tick: the (projected) distribution while alive
    let mut hist: Vec<Vec<Option<ActionDistribution>>> = vec![Vec::with_capacity(len); agents];
    for rec in &log.records {
        for (a, ar) in rec.agents.iter().enumerate() {
            let d = if ar.alive {
                let d = ar.action_distribution.as_ref().ok_or(Error::MissingChannel("action_distribution"))?;
                Some(match grouping {
                    Some(g) => semantic_projection(d, g)?,
                    None => d.clone(),
                })
            } else {
                None
            };
            hist[a].push(d);
        }
    }
    let half = cfg.half_window.unwrap_or(len / 2);
    let mut out = Vec::with_capacity(len);
    for t in 0..len {
        let act = active(log, t);
        let (lo, hi) = clipped_window(len, t, half);
        let profiles: Vec<Option<ActionDistribution>> = (0..agents)
            .map(|a| {
                if hist[a][t].is_none() {
                    return Ok(None);
                }
                window_mean(hist[a][lo..=hi].iter().flatten()).map(Some)
            })
            .collect::<Result<_>>()?;
        let v = diversity_over(&act, |i, j| {
            symmetric_kl(profiles[i].as_ref().unwrap(), profiles[j].as_ref().unwrap(), cfg.smoothing)
        })?;
        out.push((log.records[t].tick, v));
    }
    Ok(out)
}

fn trajectory_series(log: &EpisodeLog) -> Result<Vec<(usize, Option<f64>)>> {
    let r = log.header.vision_scope.ok_or(Error::MissingChannel("vision_scope"))?;
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("vision scope must be positive, got {r}")));
    }
    let mut out = Vec::with_capacity(log.len());
    for (t, rec) in log.records.iter().enumerate() {
        let act = active(log, t);
        let v = diversity_over(&act, |i, j| {
            let (p, q) = (rec.agents[i].position, rec.agents[j].position);
            Ok(overlap_fraction((p[0] - q[0]).hypot(p[1] - q[1]), r))
        })?;
        out.push((rec.tick, v));
    }
    Ok(out)
}

fn contribution_series(log: &EpisodeLog, norm: ContributionNormalization) -> Result<Vec<(usize, Option<f64>)>> {
    let mut out = Vec::with_capacity(log.len());
    for (t, rec) in log.records.iter().enumerate() {
        let act = active(log, t);
        let values: Vec<f64> = act
            .iter()
            .map(|&a| rec.agents[a].q_value.ok_or(Error::MissingChannel("q_value")))
            .collect::<Result<_>>()?;
        let idx: Vec<usize> = (0..act.len()).collect();
        let v = diversity_over(&idx, |i, j| contribution_distance_with(&values, i, j, norm))?;
        out.push((rec.tick, v));
    }
    Ok(out)
}

/// Contribution diversity of each agent's largest chosen-action value over the
/// episode; agents that never acted are left out.
pub fn episode_max_contribution(log: &EpisodeLog, norm: ContributionNormalization) -> Result<Option<f64>> {
    let mut best: Vec<Option<f64>> = vec![None; log.header.agent_count];
    for rec in &log.records {
        for (a, ar) in rec.agents.iter().enumerate() {
            if ar.alive {
                let q = ar.q_value.ok_or(Error::MissingChannel("q_value"))?;
                best[a] = Some(best[a].map_or(q, |b| b.max(q)));
            }
        }
    }
    let values: Vec<f64> = best.into_iter().flatten().collect();
    let idx: Vec<usize> = (0..values.len()).collect();
    diversity_over(&idx, |i, j| contribution_distance_with(&values, i, j, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::{AgentRecord, EpisodeHeader, TickRecord};
    use std::collections::BTreeMap;

    pub(crate) fn log_from(agents: usize, ticks: usize, f: impl Fn(usize, usize) -> AgentRecord) -> EpisodeLog {
        let mut log = EpisodeLog::new(EpisodeHeader {
            scenario: "test".into(),
            config_hash: String::new(),
            seed: 0,
            episode: 0,
            agent_count: agents,
            vision_scope: Some(1.0),
            semantic_groups: Some(SemanticGrouping::new(vec![0, 0, 1]).unwrap()),
        });
        for t in 0..ticks {
            let agents = (0..agents).map(|a| f(t, a)).collect();
            log.push(TickRecord { tick: t, agents, reward: 0.0, info: BTreeMap::new() }).unwrap();
        }
        log
    }

    fn rec(pos: [f64; 2], d: &[f64], q: f64) -> AgentRecord {
        AgentRecord {
            position: pos,
            alive: true,
            action_distribution: Some(ActionDistribution::new(d.to_vec()).unwrap()),
            action: Some(0),
            q_value: Some(q),
        }
    }

    #[test]
    fn identical_positions_give_full_overlap() {
        let log = log_from(2, 6, |t, _| rec([t as f64, 1.0], &[1.0, 0.0, 0.0], 0.0));
        let s = diversity_timeseries(&log, MetricKind::TrajectoryOverlap, &MetricsConfig::default()).unwrap();
        assert!(s.values.iter().all(|(_, v)| *v == Some(1.0)));
    }

    #[test]
    fn identical_policies_give_zero_action_diversity() {
        let log = log_from(2, 6, |t, a| {
            rec([a as f64, 0.0], if t % 2 == 0 { &[0.2, 0.3, 0.5] } else { &[1.0, 0.0, 0.0] }, 0.0)
        });
        for kind in [MetricKind::ActionReal, MetricKind::ActionSemantic] {
            let s = diversity_timeseries(&log, kind, &MetricsConfig::default()).unwrap();
            assert!(s.values.iter().all(|(_, v)| *v == Some(0.0)), "{kind:?}");
        }
    }

    #[test]
    fn constant_values_give_two_thirds() {
        let log = log_from(3, 4, |_, a| rec([0.0, 0.0], &[1.0, 0.0, 0.0], [2.0, 2.0, 4.0][a]));
        let s = diversity_timeseries(&log, MetricKind::Contribution, &MetricsConfig::default()).unwrap();
        for (_, v) in &s.values {
            assert!((v.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        }
        let e = episode_max_contribution(&log, ContributionNormalization::MaxPairDifference).unwrap().unwrap();
        assert!((e - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dead_agents_leave_gaps() {
        let log = log_from(2, 4, |t, a| {
            let mut r = rec([0.0, 0.0], &[1.0, 0.0, 0.0], 1.0 + a as f64);
            if a == 1 && t >= 2 {
                r.alive = false;
                r.action_distribution = None;
                r.q_value = None;
            }
            r
        });
        for kind in MetricKind::ALL {
            let s = diversity_timeseries(&log, kind, &MetricsConfig::default()).unwrap();
            assert!(s.values[0].1.is_some() && s.values[1].1.is_some(), "{kind:?}");
            assert_eq!(s.values[2].1, None);
            assert_eq!(s.values[3].1, None);
        }
    }

    #[test]
    fn missing_channels_are_reported() {
        let mut log = log_from(2, 2, |_, _| rec([0.0, 0.0], &[1.0, 0.0, 0.0], 1.0));
        log.header.vision_scope = None;
        log.header.semantic_groups = None;
        let cfg = MetricsConfig::default();
        assert_eq!(
            diversity_timeseries(&log, MetricKind::TrajectoryOverlap, &cfg).unwrap_err(),
            Error::MissingChannel("vision_scope")
        );
        assert_eq!(
            diversity_timeseries(&log, MetricKind::ActionSemantic, &cfg).unwrap_err(),
            Error::MissingChannel("semantic_groups")
        );
        log.records[0].agents[0].q_value = None;
        assert_eq!(diversity_timeseries(&log, MetricKind::Contribution, &cfg).unwrap_err().kind(), "missing-channel");
    }

    #[test]
    fn window_changes_action_profile() {
        // agent 0 always plays action 0; agent 1 switches halfway
        let log = log_from(2, 4, |t, a| {
            let d: &[f64] = if a == 1 && t >= 2 { &[0.0, 0.0, 1.0] } else { &[1.0, 0.0, 0.0] };
            rec([0.0, 0.0], d, 0.0)
        });
        let narrow = MetricsConfig { half_window: Some(0), ..Default::default() };
        let s = diversity_timeseries(&log, MetricKind::ActionReal, &narrow).unwrap();
        assert_eq!(s.values[0].1, Some(0.0));
        assert!(s.values[3].1.unwrap() > 30.0);
        let full = MetricsConfig { half_window: Some(10), ..Default::default() };
        let s = diversity_timeseries(&log, MetricKind::ActionReal, &full).unwrap();
        let first = s.values[0].1.unwrap();
        assert!(s.values.iter().all(|(_, v)| v.unwrap() == first));
    }
}
