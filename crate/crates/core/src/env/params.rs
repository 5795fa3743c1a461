use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::units::{UnitStats, UnitType};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SpreadReward {
    /// Negative landmark distance.
    Distance,
    /// Weight of every landmark occupied within `radius`.
    Capture { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    /// Each landmark is scored against its closest agent.
    Nearest,
    /// Agent `i` is scored against landmark `i mod landmarks`.
    Assigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkLayout {
    /// Drawn once from `layout_seed`; identical for every episode and run seed.
    Fixed,
    /// Redrawn at every reset.
    PerEpisode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartLayout {
    Random,
    /// All agents start on one random cell.
    Clustered,
    /// Centre of the grid.
    Centre,
}

/// Parameters of the landmark-covering scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpreadParams {
    pub agents: usize,
    pub landmarks: usize,
    /// Cells per side; coordinates run over `0..grid`.
    pub grid: usize,
    pub vision_scope: f64,
    pub horizon: usize,
    pub reward_bound: f64,
    pub reward: SpreadReward,
    pub assignment: Assignment,
    pub reward_scale: f64,
    pub landmark_weights: Option<Vec<f64>>,
    /// Explicit landmark cells; with a per-episode layout these are the candidates drawn from.
    pub landmarks_at: Option<Vec<[f64; 2]>>,
    pub starts_at: Option<Vec<[f64; 2]>>,
    pub landmark_layout: LandmarkLayout,
    pub start_layout: StartLayout,
    /// Seed of the fixed landmark draw, independent of the episode seed so
    /// that every run of a config faces the same map.
    pub layout_seed: u64,
}

impl Default for SpreadParams {
    fn default() -> Self {
        Self {
            agents: 3,
            landmarks: 3,
            grid: 5,
            vision_scope: 2.0,
            horizon: 25,
            reward_bound: 20.0,
            reward: SpreadReward::Distance,
            assignment: Assignment::Nearest,
            reward_scale: 1.0,
            landmark_weights: None,
            landmarks_at: None,
            starts_at: None,
            landmark_layout: LandmarkLayout::Fixed,
            start_layout: StartLayout::Random,
            layout_seed: 0,
        }
    }
}

impl SpreadParams {
    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParams(m));
        if self.agents == 0 || self.landmarks == 0 {
            return bad("spread needs at least one agent and one landmark".into());
        }
        if self.grid < 2 {
            return bad(format!("grid must be at least 2, got {}", self.grid));
        }
        if !(self.vision_scope > 0.0) {
            return bad(format!("vision_scope must be positive, got {}", self.vision_scope));
        }
        if self.horizon == 0 || !(self.reward_bound > 0.0) || !(self.reward_scale > 0.0) {
            return bad("horizon, reward_bound and reward_scale must be positive".into());
        }
        if let SpreadReward::Capture { radius } = self.reward {
            if !(radius >= 0.0) {
                return bad(format!("capture radius must be non-negative, got {radius}"));
            }
        }
        if let Some(w) = &self.landmark_weights {
            if w.len() != self.landmarks || w.iter().any(|x| !(*x >= 0.0)) {
                return bad("landmark_weights needs one non-negative weight per landmark".into());
            }
        }
        let max = (self.grid - 1) as f64;
        let in_bounds = |p: &[f64; 2]| p.iter().all(|c| (0.0..=max).contains(c));
        if let Some(l) = &self.landmarks_at {
            let enough = match self.landmark_layout {
                LandmarkLayout::Fixed => l.len() == self.landmarks,
                LandmarkLayout::PerEpisode => l.len() >= self.landmarks,
            };
            if !enough || !l.iter().all(in_bounds) {
                return bad("landmarks_at has the wrong length or leaves the grid".into());
            }
        }
        if let Some(s) = &self.starts_at {
            if s.len() != self.agents || !s.iter().all(in_bounds) {
                return bad("starts_at needs one in-bounds cell per agent".into());
            }
        }
        if self.landmarks_at.is_none()
            && self.landmark_layout == LandmarkLayout::Fixed
            && self.landmarks > self.grid * self.grid
        {
            return bad("more landmarks than cells".into());
        }
        Ok(())
    }

    pub(crate) fn weight(&self, l: usize) -> f64 {
        self.landmark_weights.as_ref().map_or(1.0, |w| w[l])
    }
}

/// Parameters of the unit-type battle scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BattleParams {
    pub allies: Vec<UnitType>,
    pub enemies: usize,
    pub enemy_type: UnitType,
    /// Cells per side of the square map.
    pub size: usize,
    pub vision_scope: f64,
    pub horizon: usize,
    pub reward_bound: f64,
    /// Raw reward added on victory before scaling.
    pub win_bonus: f64,
    /// Weight of damage received (and of health restored) relative to damage dealt.
    pub received_weight: f64,
    /// Per-type attribute overrides on top of the shipped table.
    pub unit_stats: BTreeMap<UnitType, UnitStats>,
}

impl Default for BattleParams {
    fn default() -> Self {
        Self {
            allies: vec![UnitType::Melee, UnitType::Ranged, UnitType::Healer, UnitType::Heavy],
            enemies: 5,
            enemy_type: UnitType::Chaser,
            size: 6,
            vision_scope: 3.75,
            horizon: 40,
            reward_bound: 20.0,
            win_bonus: 10.0,
            received_weight: 0.5,
            unit_stats: BTreeMap::new(),
        }
    }
}

impl BattleParams {
    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParams(m));
        if self.allies.is_empty() || self.enemies == 0 {
            return bad("battle needs at least one ally and one enemy".into());
        }
        if self.size < 4 || self.allies.len().max(self.enemies) > self.size {
            return bad(format!("map size {} too small for the unit counts", self.size));
        }
        if self.horizon == 0 || !(self.reward_bound > 0.0) || !(self.win_bonus >= 0.0) || !(self.received_weight >= 0.0)
        {
            return bad("horizon and reward_bound must be positive, win_bonus and received_weight non-negative".into());
        }
        if self.allies.contains(&UnitType::Chaser) || self.allies.contains(&UnitType::Mover) {
            return bad("allies must be melee, ranged, healer or heavy".into());
        }
        Ok(())
    }
}

/// A scenario name together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ScenarioConfig {
    Spread(SpreadParams),
    DoubleSpread(SpreadParams),
    HeteroBattle(BattleParams),
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::Spread(_) => "spread",
            ScenarioConfig::DoubleSpread(_) => "double_spread",
            ScenarioConfig::HeteroBattle(_) => "hetero_battle",
        }
    }

    /// Builds a config from a scenario name and a JSON parameter object.
    pub fn from_parts(name: &str, params: serde_json::Value) -> Result<Self> {
        let params = if params.is_null() { serde_json::Value::Object(Default::default()) } else { params };
        let de = |e: serde_json::Error| Error::BadParams(e.to_string());
        let cfg = match name {
            "spread" => ScenarioConfig::Spread(serde_json::from_value(params).map_err(de)?),
            "double_spread" => ScenarioConfig::DoubleSpread(serde_json::from_value(params).map_err(de)?),
            "hetero_battle" => ScenarioConfig::HeteroBattle(serde_json::from_value(params).map_err(de)?),
            other => return Err(Error::UnknownScenario(other.to_string())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScenarioConfig::Spread(p) | ScenarioConfig::DoubleSpread(p) => p.validate(),
            ScenarioConfig::HeteroBattle(p) => p.validate(),
        }
    }
}
