//! Per-tick episode records and their line-delimited JSON form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::metrics::{ActionDistribution, SemanticGrouping};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeHeader {
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub episode: usize,
    pub agent_count: usize,
    /// Shared vision radius, required by the trajectory metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vision_scope: Option<f64>,
    /// Semantic group of every action index, required by the semantic action metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic_groups: Option<SemanticGrouping>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRecord {
    pub position: [f64; 2],
    pub alive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_distribution: Option<ActionDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<usize>,
    /// Value of the chosen action under the agent's own Q-function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TickRecord {
    pub tick: usize,
    pub agents: Vec<AgentRecord>,
    pub reward: f64,
    #[serde(default)]
    pub info: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub header: EpisodeHeader,
    pub records: Vec<TickRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header(EpisodeHeader),
    Tick(TickRecord),
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LineRef<'a> {
    Header(&'a EpisodeHeader),
    Tick(&'a TickRecord),
}

impl EpisodeLog {
    pub fn new(header: EpisodeHeader) -> Self {
        Self { header, records: Vec::new() }
    }

    /// Appends a record, checking tick order and agent count.
    pub fn push(&mut self, record: TickRecord) -> Result<()> {
        if record.agents.len() != self.header.agent_count {
            return Err(Error::DimensionMismatch { expected: self.header.agent_count, actual: record.agents.len() });
        }
        if record.tick != self.records.len() {
            return Err(Error::InvalidArgument(format!(
                "tick {} appended at position {}",
                record.tick,
                self.records.len()
            )));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward).sum()
    }

    /// One header line followed by one line per tick.
    pub fn write_jsonl(&self, out: &mut String) {
        push_line(out, &LineRef::Header(&self.header));
        for r in &self.records {
            push_line(out, &LineRef::Tick(r));
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        self.write_jsonl(&mut s);
        s
    }
}

fn push_line(out: &mut String, line: &LineRef<'_>) {
    out.push_str(&serde_json::to_string(line).expect("episode records serialize"));
    out.push('\n');
}

/// Serializes several episodes into one line-delimited document.
pub fn logs_to_jsonl(logs: &[EpisodeLog]) -> String {
    let mut s = String::new();
    for log in logs {
        log.write_jsonl(&mut s);
    }
    s
}

/// Parses a document made of header lines each followed by its tick lines.
pub fn logs_from_jsonl(text: &str) -> Result<Vec<EpisodeLog>> {
    let mut logs: Vec<EpisodeLog> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line =
            serde_json::from_str(raw).map_err(|e| Error::InvalidArgument(format!("line {}: {e}", i + 1)))?;
        match line {
            Line::Header(h) => logs.push(EpisodeLog::new(h)),
            Line::Tick(t) => {
                let log = logs
                    .last_mut()
                    .ok_or_else(|| Error::InvalidArgument(format!("line {}: tick before any header", i + 1)))?;
                log.push(t).map_err(|e| Error::InvalidArgument(format!("line {}: {e}", i + 1)))?;
            }
        }
    }
    Ok(logs)
}
