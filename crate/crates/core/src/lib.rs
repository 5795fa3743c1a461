//! Role diversity toolkit for cooperative multi-agent reinforcement learning.
//!
//! The crate is organised around the data flow of a diagnosis run:
//!
//! * [`env`] simulates small cooperative tasks with circular partial observability.
//! * [`learner`] trains tabular joint-Q policies under a chosen parameter sharing,
//!   communication and credit assignment strategy and records [`episode::EpisodeLog`]s.
//! * [`metrics`] turns those logs into action-, trajectory- and contribution-based
//!   role diversity.
//! * [`diagnosis`] maps a [`metrics::TaskMeasurement`] to strategy recommendations and
//!   compares strategies empirically.
//! * [`fqi`] measures the terms of the fitted-Q error decomposition on exact finite MDPs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnosis;
pub mod env;
pub mod episode;
mod error;
pub mod fqi;
pub mod learner;
pub mod metrics;
pub mod stats;

pub use error::{Error, Result};
