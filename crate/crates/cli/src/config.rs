use std::io::Read;
use std::path::{Path, PathBuf};

use role_diversity::diagnosis::GuidelineThresholds;
use role_diversity::env::{make_scenario, Env};
use role_diversity::fqi::{MdpSource, SweepGrid};
use role_diversity::learner::{CreditKind, KeyConfig, SharingMode, Strategy, TrainingConfig};
use role_diversity::metrics::{MeasurementConfig, TaskMeasurement};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Failure classes mapped onto process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0:#}")]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

pub fn config_err(msg: impl std::fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    pub sharing: Vec<SharingMode>,
    #[serde(default = "default_comm")]
    pub comm: Vec<bool>,
    pub credit: Vec<CreditKind>,
    /// Return an evaluation must reach to count as solved.
    pub threshold: f64,
}

fn default_comm() -> Vec<bool> {
    vec![false]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryBlock {
    pub source: MdpSource,
    #[serde(default)]
    pub grid: SweepGrid,
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

/// One declarative run description shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: Option<ScenarioBlock>,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default = "Strategy::baseline")]
    pub strategy: Strategy,
    #[serde(default)]
    pub metrics: MeasurementConfig,
    #[serde(default)]
    pub features: Option<KeyConfig>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub compare: Option<CompareBlock>,
    #[serde(default)]
    pub thresholds: Option<GuidelineThresholds>,
    #[serde(default)]
    pub measurement: Option<TaskMeasurement>,
    #[serde(default)]
    pub theory: Option<TheoryBlock>,
    /// Output directory; the `--out` flag takes precedence.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            training: TrainingConfig::default(),
            strategy: Strategy::baseline(),
            metrics: MeasurementConfig::default(),
            features: None,
            seeds: default_seeds(),
            compare: None,
            thresholds: None,
            measurement: None,
            theory: None,
            out: None,
        }
    }
}

impl RunConfig {
    /// Hex sha256 of the canonical JSON form; the output directory is excluded.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serialises");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.training.validate().map_err(|e| config_err(format!("training: {e}")))?;
        if self.seeds.is_empty() {
            return Err(config_err("seeds: at least one seed is required"));
        }
        if let Some(s) = &self.scenario {
            make_scenario(&s.name, s.params.clone(), 0).map_err(|e| config_err(format!("scenario.params: {e}")))?;
        }
        if let Some(t) = &self.thresholds {
            t.validate().map_err(|e| config_err(format!("thresholds: {e}")))?;
        }
        if let Some(m) = &self.measurement {
            m.validate().map_err(|e| config_err(format!("measurement: {e}")))?;
        }
        if let Some(c) = &self.compare {
            if c.sharing.is_empty() || c.comm.is_empty() || c.credit.is_empty() {
                return Err(config_err("compare: every strategy axis needs at least one value"));
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> Result<&ScenarioBlock, CliError> {
        self.scenario.as_ref().ok_or_else(|| config_err("missing field `scenario`"))
    }

    pub fn env_factory(&self) -> Result<impl Fn(u64) -> role_diversity::Result<Env> + Sync + '_, CliError> {
        let s = self.scenario()?;
        Ok(move |seed| make_scenario(&s.name, s.params.clone(), seed))
    }
}

/// Reads a file, or stdin for `-`.
pub fn read_source(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| config_err(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }
}

/// Parses TOML, or JSON when the text starts with `{`, reporting the field path of failures.
pub fn parse_document<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    if text.trim_start().starts_with('{') {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de)
            .map_err(|e| config_err(format!("{origin}: at `{}`: {}", e.path(), e.inner())))
    } else {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner().to_string();
            config_err(format!("{origin}: at `{}`: {}", e.path(), inner.trim_end()))
        })
    }
}

/// Parses `1,2,5` or `1..8` (inclusive) seed lists.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("bad seed range start: {e}"))?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("bad seed range end: {e}"))?;
        if b < a {
            return Err(format!("empty seed range {a}..{b}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse::<u64>().map_err(|e| format!("bad seed `{x}`: {e}"))).collect()
}
