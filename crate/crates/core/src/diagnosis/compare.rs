use serde::{Deserialize, Serialize};

use crate::env::Env;
use crate::learner::{train, CommConfig, CreditKind, KeyConfig, SharingMode, Strategy, TrainingConfig, TrainingRun};
use crate::stats::{mean, pooled_sd, sd};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub rank: usize,
    pub strategy: Strategy,
    pub label: String,
    pub finals: Vec<f64>,
    pub mean_final: f64,
    pub sd_final: f64,
    /// Mean first evaluated step reaching the threshold; seeds that never reach it count as `total_steps`.
    pub mean_steps_to_threshold: f64,
    pub seeds_reaching_threshold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub threshold: f64,
    /// Rows sorted by rank.
    pub rows: Vec<ComparisonRow>,
    /// Whether the recommended cell's mean final return is within one pooled standard deviation of the best cell's.
    pub recommended_within_sd: Option<bool>,
}

impl ComparisonTable {
    pub fn row(&self, strategy: &Strategy) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| &r.strategy == strategy)
    }
}

/// Cartesian product of the three strategy axes, in axis order.
pub fn strategy_grid(sharing: &[SharingMode], comm: &[bool], credit: &[CreditKind]) -> Vec<Strategy> {
    let mut out = Vec::new();
    for s in sharing {
        for c in comm {
            for k in credit {
                out.push(Strategy {
                    sharing: *s,
                    credit: *k,
                    comm: CommConfig { enabled: *c, ..CommConfig::default() },
                    ..Strategy::baseline()
                });
            }
        }
    }
    out
}

/// Trains every cell on every seed and ranks cells by mean final return,
/// then by mean steps to `threshold`, then by grid order.
pub fn compare_strategies(
    factory: &(dyn Fn(u64) -> Result<Env> + Sync),
    cfg: &TrainingConfig,
    grid: &[Strategy],
    seeds: &[u64],
    threshold: f64,
    features: Option<KeyConfig>,
    recommended: Option<&Strategy>,
) -> Result<ComparisonTable> {
    if grid.is_empty() || seeds.is_empty() {
        return Err(Error::BadParams("comparison needs at least one strategy and one seed".into()));
    }
    let runs = train_grid(factory, cfg, grid, seeds, features)?;
    let mut rows: Vec<ComparisonRow> = grid
        .iter()
        .zip(runs.chunks(seeds.len()))
        .map(|(strategy, runs)| {
            let finals: Vec<f64> = runs.iter().map(TrainingRun::final_return).collect();
            let steps: Vec<f64> =
                runs.iter().map(|r| r.steps_to(threshold).unwrap_or(cfg.total_steps) as f64).collect();
            ComparisonRow {
                rank: 0,
                strategy: strategy.clone(),
                label: strategy.label(),
                mean_final: mean(&finals),
                sd_final: sd(&finals),
                mean_steps_to_threshold: mean(&steps),
                seeds_reaching_threshold: runs.iter().filter(|r| r.steps_to(threshold).is_some()).count(),
                finals,
            }
        })
        .collect();
    let order = |a: &ComparisonRow, b: &ComparisonRow| {
        b.mean_final.total_cmp(&a.mean_final).then(a.mean_steps_to_threshold.total_cmp(&b.mean_steps_to_threshold))
    };
    // stable sort keeps grid order among exact ties
    rows.sort_by(order);
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    let recommended_within_sd = recommended.and_then(|s| {
        let rec = rows.iter().find(|r| &r.strategy == s)?;
        let best = &rows[0];
        Some(best.mean_final - rec.mean_final <= pooled_sd(&best.finals, &rec.finals))
    });
    Ok(ComparisonTable { threshold, rows, recommended_within_sd })
}

/// Trains every `(cell, seed)` pair; results are cell-major.
pub fn train_grid(
    factory: &(dyn Fn(u64) -> Result<Env> + Sync),
    cfg: &TrainingConfig,
    grid: &[Strategy],
    seeds: &[u64],
    features: Option<KeyConfig>,
) -> Result<Vec<TrainingRun>> {
    let tasks: Vec<(&Strategy, u64)> = grid.iter().flat_map(|s| seeds.iter().map(move |seed| (s, *seed))).collect();
    let run = |(strategy, seed): &(&Strategy, u64)| -> Result<TrainingRun> {
        let cfg = TrainingConfig { seed: *seed, ..cfg.clone() };
        train(factory, &cfg, strategy, features.clone())
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        tasks.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        tasks.iter().map(run).collect()
    }
}
