//! Tabular joint-Q learning with configurable parameter sharing,
//! communication and credit assignment.

mod credit;
mod keys;
mod qfunction;
mod train;

pub use credit::{project_to_simplex, td_update, CreditAssignment, CreditKind, Transition};
pub use keys::{apply_communication, selective_groups, CommConfig, KeyConfig, ObsKey, SharingMode, SharingPlan, NONE};
pub use qfunction::{epsilon_greedy_distribution, select_actions, QFunction, QTableDump};
pub use train::{
    evaluate, final_info, record_episodes, train, CurvePoint, EpsilonSchedule, KeyBuilder, Strategy, TrainingConfig,
    TrainingRun,
};
