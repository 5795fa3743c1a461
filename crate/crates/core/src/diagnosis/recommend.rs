use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::learner::{CommConfig, CreditKind, SharingMode, Strategy};
use crate::metrics::TaskMeasurement;
use crate::{Error, Result};

/// Cut-offs of the recommendation rules. The action cut-offs live on the
/// semantic action-diversity scale of one environment family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuidelineThresholds {
    pub family: String,
    pub action_shared_max: f64,
    pub action_noshared_min: f64,
    pub comm_overlap_min: f64,
    pub contribution_learnable_max: f64,
}

impl Default for GuidelineThresholds {
    fn default() -> Self {
        Self {
            family: "smac".into(),
            action_shared_max: 3.2,
            action_noshared_min: 5.0,
            comm_overlap_min: 0.30,
            contribution_learnable_max: 0.50,
        }
    }
}

impl GuidelineThresholds {
    pub fn validate(&self) -> Result<()> {
        let finite =
            [self.action_shared_max, self.action_noshared_min, self.comm_overlap_min, self.contribution_learnable_max]
                .iter()
                .all(|x| x.is_finite());
        if !finite || self.action_shared_max > self.action_noshared_min || self.action_shared_max < 0.0 {
            return Err(Error::BadParams(
                "action thresholds must satisfy 0 <= action_shared_max <= action_noshared_min".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.comm_overlap_min) || !(0.0..=1.0).contains(&self.contribution_learnable_max) {
            return Err(Error::BadParams("comm_overlap_min and contribution_learnable_max must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingRecommendation {
    Shared,
    PartlyShared,
    NoShared,
}

impl SharingRecommendation {
    pub fn name(self) -> &'static str {
        match self {
            SharingRecommendation::Shared => "shared",
            SharingRecommendation::PartlyShared => "partly_shared",
            SharingRecommendation::NoShared => "no_shared",
        }
    }

    pub fn mode(self) -> SharingMode {
        match self {
            SharingRecommendation::Shared => SharingMode::Shared,
            SharingRecommendation::PartlyShared => SharingMode::PartlyShared,
            SharingRecommendation::NoShared => SharingMode::NoShared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Communication {
    On,
    Off,
}

impl Communication {
    pub fn name(self) -> &'static str {
        match self {
            Communication::On => "on",
            Communication::Off => "off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CreditRecommendation {
    LearnableMixer,
    FixedSumOrIndependent,
}

impl CreditRecommendation {
    pub fn name(self) -> &'static str {
        match self {
            CreditRecommendation::LearnableMixer => "learnable_mixer",
            CreditRecommendation::FixedSumOrIndependent => "fixed_sum_or_independent",
        }
    }

    /// Learner credit kind used to realise the recommendation.
    pub fn kind(self) -> CreditKind {
        match self {
            CreditRecommendation::LearnableMixer => CreditKind::LearnableWeights,
            CreditRecommendation::FixedSumOrIndependent => CreditKind::VdnSum,
        }
    }
}

/// The measured value, the thresholds it was compared against and the rule that fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub axis: String,
    pub metric: String,
    pub measured: f64,
    pub thresholds: Vec<(String, f64)>,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub sharing: SharingRecommendation,
    pub communication: Communication,
    pub credit: CreditRecommendation,
    /// Sharing, communication and credit evidence, in that order.
    pub evidence: Vec<Evidence>,
    pub thresholds: GuidelineThresholds,
}

impl DiagnosisReport {
    /// The learner strategy realising the three recommendations.
    pub fn strategy(&self) -> Strategy {
        Strategy {
            sharing: self.sharing.mode(),
            credit: self.credit.kind(),
            comm: CommConfig { enabled: self.communication == Communication::On, ..CommConfig::default() },
            ..Strategy::baseline()
        }
    }

    pub fn render_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DiagnosisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "threshold family: {}", self.thresholds.family)?;
        let picks = [self.sharing.name(), self.communication.name(), self.credit.name()];
        for (e, pick) in self.evidence.iter().zip(picks) {
            let mut cut = String::new();
            for (i, (name, v)) in e.thresholds.iter().enumerate() {
                let _ = write!(cut, "{}{name}={v}", if i > 0 { ", " } else { "" });
            }
            writeln!(f, "{}: {pick}", e.axis)?;
            writeln!(f, "  {} = {} ({cut})", e.metric, e.measured)?;
            writeln!(f, "  rule: {}", e.rule)?;
        }
        Ok(())
    }
}

/// Applies the three threshold rules.
pub fn recommend(m: &TaskMeasurement, t: &GuidelineThresholds) -> DiagnosisReport {
    let sem = m.action_semantic;
    let (sharing, rule) = if sem < t.action_shared_max {
        (SharingRecommendation::Shared, "action_semantic < action_shared_max => shared")
    } else if sem > t.action_noshared_min {
        (SharingRecommendation::NoShared, "action_semantic > action_noshared_min => no_shared")
    } else {
        (
            SharingRecommendation::PartlyShared,
            "action_shared_max <= action_semantic <= action_noshared_min => partly_shared",
        )
    };
    let sharing_ev = Evidence {
        axis: "sharing".into(),
        metric: "action_semantic".into(),
        measured: sem,
        thresholds: vec![
            ("action_shared_max".into(), t.action_shared_max),
            ("action_noshared_min".into(), t.action_noshared_min),
        ],
        rule: rule.into(),
    };
    let (communication, rule) = if m.trajectory_overlap >= t.comm_overlap_min {
        (Communication::On, "trajectory_overlap >= comm_overlap_min => on")
    } else {
        (Communication::Off, "trajectory_overlap < comm_overlap_min => off")
    };
    let comm_ev = Evidence {
        axis: "communication".into(),
        metric: "trajectory_overlap".into(),
        measured: m.trajectory_overlap,
        thresholds: vec![("comm_overlap_min".into(), t.comm_overlap_min)],
        rule: rule.into(),
    };
    let (credit, rule) = if m.contribution > t.contribution_learnable_max {
        (
            CreditRecommendation::FixedSumOrIndependent,
            "contribution > contribution_learnable_max => fixed_sum_or_independent",
        )
    } else {
        (CreditRecommendation::LearnableMixer, "contribution <= contribution_learnable_max => learnable_mixer")
    };
    let credit_ev = Evidence {
        axis: "credit".into(),
        metric: "contribution".into(),
        measured: m.contribution,
        thresholds: vec![("contribution_learnable_max".into(), t.contribution_learnable_max)],
        rule: rule.into(),
    };
    DiagnosisReport {
        sharing,
        communication,
        credit,
        evidence: vec![sharing_ev, comm_ev, credit_ev],
        thresholds: t.clone(),
    }
}
