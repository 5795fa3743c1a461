//! Fitted Q-iteration on exact finite MDPs and measurement of the terms of
//! its excess-risk decomposition.

mod mdp;
mod report;
mod run;
mod sweep;
mod weights;

#[cfg(test)]
mod tests;

pub use mdp::{
    value_iteration_oracle, AgentMdp, FiniteMDPSpec, JointSupport, OracleSolution, ValueTable, MAX_JOINT_SUPPORT,
};
pub use report::{
    algorithmic_term, decompose, decompose_estimates, DecompositionReport, Estimates, EvaluationDistribution,
};
pub use run::{fqi_run, FqiMode, FqiRun, HypothesisSpace, SamplingDistribution};
pub use sweep::{sweep, MdpFamily, MdpSource, Summary, SweepGrid, SweepRow};
pub use weights::{fit_credit_weights, CreditFit, MAX_WEIGHT_AGENTS};
