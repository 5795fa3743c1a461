use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitType {
    Melee,
    Ranged,
    Healer,
    Heavy,
    /// Unarmed navigator used by the landmark scenarios.
    Mover,
    /// Scripted opponent.
    Chaser,
}

impl UnitType {
    pub fn tag(self) -> u8 {
        self as u8
    }
}

/// Per-type attributes. For healers `damage` is the amount healed per action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitStats {
    pub max_health: f64,
    pub attack_range: f64,
    pub damage: f64,
    pub move_speed: f64,
}

/// Attribute table keyed by unit type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitTable(pub BTreeMap<UnitType, UnitStats>);

impl Default for UnitTable {
    fn default() -> Self {
        let s =
            |max_health, attack_range, damage, move_speed| UnitStats { max_health, attack_range, damage, move_speed };
        UnitTable(BTreeMap::from([
            (UnitType::Melee, s(10.0, 1.0, 3.0, 1.0)),
            (UnitType::Ranged, s(6.0, 2.5, 2.0, 1.0)),
            (UnitType::Healer, s(8.0, 2.0, 3.0, 1.0)),
            (UnitType::Heavy, s(18.0, 1.0, 2.0, 1.0)),
            (UnitType::Mover, s(1.0, 0.0, 0.0, 1.0)),
            (UnitType::Chaser, s(5.0, 1.0, 1.0, 1.0)),
        ]))
    }
}

impl UnitTable {
    /// Defaults overridden by the entries of `overrides`.
    pub fn with_overrides(overrides: &BTreeMap<UnitType, UnitStats>) -> Self {
        let mut t = Self::default();
        for (k, v) in overrides {
            t.0.insert(*k, *v);
        }
        t
    }

    pub fn get(&self, t: UnitType) -> Result<UnitStats> {
        let s = *self.0.get(&t).ok_or_else(|| Error::BadParams(format!("no stats for unit type {t:?}")))?;
        if !(s.max_health > 0.0 && s.move_speed > 0.0 && s.attack_range >= 0.0 && s.damage >= 0.0) {
            return Err(Error::BadParams(format!("invalid stats for unit type {t:?}")));
        }
        Ok(s)
    }
}

/// Static description of one learning agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub agent_id: usize,
    pub unit_type: UnitType,
    pub max_health: f64,
    pub attack_range: f64,
    pub damage: f64,
    pub vision_scope: f64,
    pub move_speed: f64,
}

impl AgentSpec {
    pub fn from_stats(agent_id: usize, unit_type: UnitType, stats: UnitStats, vision_scope: f64) -> Result<Self> {
        if !(vision_scope > 0.0) {
            return Err(Error::BadParams(format!("vision scope must be positive, got {vision_scope}")));
        }
        if stats.attack_range > vision_scope {
            return Err(Error::ScopeBelowAttackRange { scope: vision_scope, attack_range: stats.attack_range });
        }
        Ok(Self {
            agent_id,
            unit_type,
            max_health: stats.max_health,
            attack_range: stats.attack_range,
            damage: stats.damage,
            vision_scope,
            move_speed: stats.move_speed,
        })
    }
}
