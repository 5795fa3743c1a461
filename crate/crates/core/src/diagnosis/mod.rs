//! Strategy recommendations from measured role diversity, and empirical
//! comparison of strategy grids.

mod compare;
mod recommend;


pub use compare::{compare_strategies, strategy_grid, train_grid, ComparisonRow, ComparisonTable};
pub use recommend::{
    recommend, Communication, CreditRecommendation, DiagnosisReport, Evidence, GuidelineThresholds,
    SharingRecommendation,
};
