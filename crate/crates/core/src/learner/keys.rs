use serde::{Deserialize, Serialize};

use crate::env::{AgentSpec, EntityKind, Env, Observation, ScenarioConfig, UnitType};

/// Marker for an absent feature (nothing visible, no other agents).
pub const NONE: i32 = 99;

/// Discretised observation signature, sharing prefix first.
pub type ObsKey = Vec<i32>;

/// Which bucketed features enter an observation key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeyConfig {
    /// Absolute position bucket size; `None` leaves position out.
    pub self_cell: Option<f64>,
    /// Bucket size of relative offsets.
    pub rel_cell: f64,
    /// Relative offsets are clamped to `[-rel_radius, rel_radius]` buckets.
    pub rel_radius: i32,
    pub landmark: bool,
    pub enemy: bool,
    pub ally: bool,
    /// Own health quartile.
    pub health: bool,
    /// Number of visible enemies, capped at 3.
    pub enemy_count: bool,
    /// Bitmask of the non-move actions currently available.
    pub mask: bool,
}

impl Default for KeyConfig {
    fn default() -> Self {
        Self {
            self_cell: Some(1.0),
            rel_cell: 1.0,
            rel_radius: 2,
            landmark: true,
            enemy: false,
            ally: false,
            health: false,
            enemy_count: false,
            mask: false,
        }
    }
}

impl KeyConfig {
    /// Shipped features for a scenario.
    pub fn for_env(env: &Env) -> Self {
        match env.config() {
            ScenarioConfig::HeteroBattle(_) => Self {
                self_cell: None,
                rel_cell: 1.0,
                rel_radius: 2,
                landmark: false,
                enemy: true,
                ally: false,
                health: true,
                enemy_count: true,
                mask: true,
            },
            _ => Self::default(),
        }
    }

    fn rel(&self, v: f64) -> i32 {
        ((v / self.rel_cell).round() as i32).clamp(-self.rel_radius, self.rel_radius)
    }

    fn push_rel(&self, key: &mut ObsKey, rel: Option<[f64; 2]>) {
        match rel {
            Some(r) => {
                key.push(self.rel(r[0]));
                key.push(self.rel(r[1]));
            }
            None => {
                key.push(NONE);
                key.push(NONE);
            }
        }
    }

    /// Features of one observation, without any sharing prefix.
    pub fn features(&self, o: &Observation) -> ObsKey {
        let mut key = Vec::with_capacity(12);
        if let Some(c) = self.self_cell {
            key.push((o.position[0] / c).floor() as i32);
            key.push((o.position[1] / c).floor() as i32);
        }
        for (on, kind) in
            [(self.landmark, EntityKind::Landmark), (self.enemy, EntityKind::Enemy), (self.ally, EntityKind::Ally)]
        {
            if on {
                self.push_rel(&mut key, o.nearest(kind).map(|e| e.rel));
            }
        }
        if self.health {
            key.push(((o.health * 4.0).ceil() as i32).clamp(0, 4));
        }
        if self.enemy_count {
            key.push(o.visible.iter().filter(|e| e.kind == EntityKind::Enemy).count().min(3) as i32);
        }
        if self.mask {
            let bits = o.available.iter().skip(crate::env::MOVE_DIRS.len()).enumerate();
            key.push(bits.fold(0, |acc, (i, a)| acc | ((*a as i32) << i)));
        }
        key
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingMode {
    Shared,
    PartlyShared,
    NoShared,
    Selective,
}

impl SharingMode {
    pub const ALL: [SharingMode; 4] =
        [SharingMode::Shared, SharingMode::PartlyShared, SharingMode::NoShared, SharingMode::Selective];

    pub fn name(self) -> &'static str {
        match self {
            SharingMode::Shared => "shared",
            SharingMode::PartlyShared => "partly_shared",
            SharingMode::NoShared => "no_shared",
            SharingMode::Selective => "selective",
        }
    }
}

/// The key prefix every agent writes under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharingPlan {
    pub mode: SharingMode,
    prefixes: Vec<Option<i32>>,
}

impl SharingPlan {
    pub fn new(mode: SharingMode, specs: &[AgentSpec]) -> Self {
        let groups = selective_groups(specs);
        let prefixes = specs
            .iter()
            .enumerate()
            .map(|(i, s)| match mode {
                SharingMode::Shared => None,
                SharingMode::PartlyShared => Some(s.unit_type.tag() as i32),
                SharingMode::NoShared => Some(i as i32),
                SharingMode::Selective => Some(groups[i] as i32),
            })
            .collect();
        Self { mode, prefixes }
    }

    pub fn prefix(&self, agent: usize) -> Option<i32> {
        self.prefixes[agent]
    }

    /// Prepends the agent's prefix to its features.
    pub fn key(&self, agent: usize, features: &[i32]) -> ObsKey {
        let mut k = Vec::with_capacity(features.len() + 1);
        if let Some(p) = self.prefixes[agent] {
            k.push(p);
        }
        k.extend_from_slice(features);
        k
    }
}

/// Groups agents by unit type, numbering groups in order of first appearance.
pub fn selective_groups(specs: &[AgentSpec]) -> Vec<usize> {
    let mut seen: Vec<UnitType> = Vec::new();
    specs
        .iter()
        .map(|s| match seen.iter().position(|t| *t == s.unit_type) {
            Some(g) => g,
            None => {
                seen.push(s.unit_type);
                seen.len() - 1
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommConfig {
    pub enabled: bool,
    /// Bucket size of the mean-of-others block.
    pub bucket: f64,
    /// Bucketed offsets are clamped to `[-radius, radius]`.
    pub radius: i32,
}

impl Default for CommConfig {
    fn default() -> Self {
        Self { enabled: false, bucket: 1.0, radius: 3 }
    }
}

/// Appends to every alive agent's key the mean, over the other alive agents,
/// of their position and of the target they see nearest (landmark or enemy),
/// both expressed relative to the receiver and bucketed. Agents with no
/// alive peers receive the empty block. Disabled: keys are returned as is.
pub fn apply_communication(observations: &[Observation], keys: &[ObsKey], comm: &CommConfig) -> Vec<ObsKey> {
    if !comm.enabled {
        return keys.to_vec();
    }
    let b = |v: f64| ((v / comm.bucket).round() as i32).clamp(-comm.radius, comm.radius);
    observations
        .iter()
        .zip(keys)
        .map(|(me, key)| {
            let mut k = key.clone();
            let others: Vec<&Observation> =
                observations.iter().filter(|o| o.observer_id != me.observer_id && o.alive).collect();
            if !me.alive || others.is_empty() {
                k.extend_from_slice(&[NONE; 4]);
                return k;
            }
            let n = others.len() as f64;
            let mean_pos = others.iter().fold([0.0, 0.0], |acc, o| {
                [acc[0] + (o.position[0] - me.position[0]) / n, acc[1] + (o.position[1] - me.position[1]) / n]
            });
            k.push(b(mean_pos[0]));
            k.push(b(mean_pos[1]));
            let targets: Vec<[f64; 2]> = others
                .iter()
                .filter_map(|o| {
                    o.visible
                        .iter()
                        .find(|e| e.kind != EntityKind::Ally)
                        .map(|e| [o.position[0] + e.rel[0] - me.position[0], o.position[1] + e.rel[1] - me.position[1]])
                })
                .collect();
            if targets.is_empty() {
                k.extend_from_slice(&[NONE; 2]);
            } else {
                let m = targets.len() as f64;
                let s = targets.iter().fold([0.0, 0.0], |acc, t| [acc[0] + t[0] / m, acc[1] + t[1] / m]);
                k.push(b(s[0]));
                k.push(b(s[1]));
            }
            k
        })
        .collect()
}
