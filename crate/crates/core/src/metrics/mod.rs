//! Action-, trajectory- and contribution-based role distances and diversities.

mod distribution;
mod diversity;
mod measurement;
mod overlap;
mod timeseries;

pub use distribution::{
    semantic_projection, symmetric_kl, ActionDistribution, SemanticGrouping, DEFAULT_SMOOTHING, MASS_TOLERANCE,
};
pub use diversity::{
    action_role_profile, contribution_distance, contribution_distance_with, role_diversity, ActionRoleProfile,
    ContributionNormalization, PairwiseDistanceMatrix,
};
pub use measurement::{
    contribution_with, task_measurement, ContributionSource, MeasurementConfig, Provenance, Reducer, TaskMeasurement,
};
pub use overlap::{observation_overlap, overlap_fraction, ObservationDisk};
pub use timeseries::{diversity_timeseries, episode_max_contribution, DiversityTimeSeries, MetricKind, MetricsConfig};
