use anyhow::Context;
use role_diversity::diagnosis::{
    compare_strategies, recommend, strategy_grid, train_grid, DiagnosisReport, GuidelineThresholds,
};
use role_diversity::episode::{logs_to_jsonl, EpisodeLog};
use role_diversity::fqi::{sweep, SweepRow};
use role_diversity::learner::{Strategy, TrainingRun};
use role_diversity::metrics::{diversity_timeseries, task_measurement, MetricKind, Provenance, TaskMeasurement};
use serde::Serialize;

use crate::config::{config_err, CliError, RunConfig};
use crate::output::{num, opt, Artifact};

fn runs(cfg: &RunConfig, hash: &str, strategy: &Strategy) -> Result<Vec<TrainingRun>, CliError> {
    let factory = cfg.env_factory()?;
    let grid = [strategy.clone()];
    let mut runs = train_grid(&factory, &cfg.training, &grid, &cfg.seeds, cfg.features.clone()).context("training")?;
    for r in &mut runs {
        for log in &mut r.logs {
            log.header.config_hash = hash.to_string();
        }
    }
    Ok(runs)
}

fn all_logs(runs: &[TrainingRun]) -> Vec<EpisodeLog> {
    runs.iter().flat_map(|r| r.logs.iter().cloned()).collect()
}

fn measure_runs(cfg: &RunConfig, hash: &str, runs: &[TrainingRun]) -> Result<TaskMeasurement, CliError> {
    let logs = all_logs(runs);
    let mut m = task_measurement(&logs, &cfg.metrics).context("measuring baseline logs")?;
    m.provenance = Some(Provenance {
        scenario: cfg.scenario()?.name.clone(),
        config_hash: hash.to_string(),
        seeds: cfg.seeds.clone(),
        episodes: logs.len(),
    });
    Ok(m)
}

/// Trains the baseline, records its episodes and measures role diversity.
pub fn measure(cfg: &RunConfig, hash: &str) -> Result<Vec<Artifact>, CliError> {
    let runs = runs(cfg, hash, &Strategy::baseline())?;
    let m = measure_runs(cfg, hash, &runs)?;
    let mut rows = Vec::new();
    for run in &runs {
        for log in &run.logs {
            for kind in MetricKind::ALL {
                let series = diversity_timeseries(log, kind, &cfg.metrics.metrics).context("time series")?;
                for (tick, v) in &series.values {
                    rows.push(vec![
                        run.seed.to_string(),
                        log.header.episode.to_string(),
                        kind.name().to_string(),
                        tick.to_string(),
                        opt(*v),
                    ]);
                }
            }
        }
    }
    Ok(vec![
        Artifact::json("measurement.json", &m)?,
        Artifact::csv("timeseries.csv", hash, &["seed", "episode", "metric", "tick", "value"], &rows)?,
        Artifact::text("episodes.jsonl", logs_to_jsonl(&all_logs(&runs))),
    ])
}

/// Trains the configured strategy on every seed.
pub fn train(cfg: &RunConfig, hash: &str) -> Result<Vec<Artifact>, CliError> {
    let runs = runs(cfg, hash, &cfg.strategy)?;
    let curve: Vec<Vec<String>> = runs
        .iter()
        .flat_map(|r| r.curve.iter().map(move |p| vec![p.step.to_string(), r.seed.to_string(), num(p.eval_return)]))
        .collect();
    let finals: Vec<Vec<String>> = runs
        .iter()
        .map(|r| {
            let w: Vec<String> = r.credit.weights.iter().map(|x| num(*x)).collect();
            vec![r.seed.to_string(), cfg.strategy.label(), num(r.final_return()), r.q.len().to_string(), w.join(";")]
        })
        .collect();
    Ok(vec![
        Artifact::csv("curve.csv", hash, &["step", "seed", "eval_return"], &curve)?,
        Artifact::csv(
            "final.csv",
            hash,
            &["seed", "strategy", "final_return", "table_rows", "credit_weights"],
            &finals,
        )?,
        Artifact::text("episodes.jsonl", logs_to_jsonl(&all_logs(&runs))),
    ])
}

#[derive(Serialize)]
struct DiagnosisDocument<'a> {
    config_hash: &'a str,
    thresholds_source: &'a str,
    measurement: &'a TaskMeasurement,
    report: &'a DiagnosisReport,
}

fn thresholds(cfg: &RunConfig) -> (GuidelineThresholds, &'static str) {
    match &cfg.thresholds {
        Some(t) => (t.clone(), "config"),
        None => (GuidelineThresholds::default(), "shipped defaults"),
    }
}

/// Applies the recommendation rules to a measurement.
pub fn diagnose(cfg: &RunConfig, hash: &str) -> Result<Vec<Artifact>, CliError> {
    let m = cfg.measurement.as_ref().ok_or_else(|| config_err("missing field `measurement` (or --measurement)"))?;
    let (t, source) = thresholds(cfg);
    let report = recommend(m, &t);
    let text = format!("# config_hash: {hash}\nthresholds: {source}\n{report}");
    let doc = DiagnosisDocument { config_hash: hash, thresholds_source: source, measurement: m, report: &report };
    Ok(vec![Artifact::json("diagnosis.json", &doc)?, Artifact::text("diagnosis.txt", text)])
}

#[derive(Serialize)]
struct ComparisonDocument<'a> {
    config_hash: &'a str,
    thresholds_source: &'a str,
    measurement: &'a TaskMeasurement,
    recommendation: &'a DiagnosisReport,
    table: &'a role_diversity::diagnosis::ComparisonTable,
}

/// Trains a strategy grid, ranks it and checks the recommended cell against the best.
pub fn compare(cfg: &RunConfig, hash: &str) -> Result<Vec<Artifact>, CliError> {
    let block = cfg.compare.as_ref().ok_or_else(|| config_err("missing field `compare`"))?;
    let baseline = runs(cfg, hash, &Strategy::baseline())?;
    let m = measure_runs(cfg, hash, &baseline)?;
    let (t, source) = thresholds(cfg);
    let report = recommend(&m, &t);
    let recommended = report.strategy();
    let grid = strategy_grid(&block.sharing, &block.comm, &block.credit);
    let factory = cfg.env_factory()?;
    let table = compare_strategies(
        &factory,
        &cfg.training,
        &grid,
        &cfg.seeds,
        block.threshold,
        cfg.features.clone(),
        Some(&recommended),
    )
    .context("comparing strategies")?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.rank.to_string(),
                r.label.clone(),
                r.strategy.sharing.name().to_string(),
                r.strategy.comm.enabled.to_string(),
                r.strategy.credit.name().to_string(),
                num(r.mean_final),
                num(r.sd_final),
                num(r.mean_steps_to_threshold),
                r.seeds_reaching_threshold.to_string(),
                (r.strategy == recommended).to_string(),
            ]
        })
        .collect();
    let header = [
        "rank",
        "strategy",
        "sharing",
        "comm",
        "credit",
        "mean_final",
        "sd_final",
        "mean_steps_to_threshold",
        "seeds_reaching_threshold",
        "recommended",
    ];
    let doc = ComparisonDocument {
        config_hash: hash,
        thresholds_source: source,
        measurement: &m,
        recommendation: &report,
        table: &table,
    };
    Ok(vec![Artifact::csv("ranking.csv", hash, &header, &rows)?, Artifact::json("comparison.json", &doc)?])
}

/// Runs the FQI decomposition sweep.
pub fn theory(cfg: &RunConfig, hash: &str) -> Result<Vec<Artifact>, CliError> {
    let block = cfg.theory.as_ref().ok_or_else(|| config_err("missing field `theory`"))?;
    let rows = sweep(&block.source, &block.grid).map_err(|e| match e.kind() {
        "bad-params" | "dimension-mismatch" | "bad-kernel" | "support-mismatch" => config_err(format!("theory: {e}")),
        _ => CliError::Runtime(e.into()),
    })?;
    let mut header = vec!["diversity", "mode", "hypothesis", "samples", "iterations", "seeds"];
    let names: Vec<String> = SweepRow::FIELDS.iter().flat_map(|f| [format!("{f}_mean"), format!("{f}_sd")]).collect();
    header.extend(names.iter().map(String::as_str));
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                opt(r.diversity),
                r.mode.name().to_string(),
                r.hypothesis.clone(),
                r.samples.to_string(),
                r.iterations.to_string(),
                r.seeds.to_string(),
            ];
            for s in r.summaries() {
                row.push(num(s.mean));
                row.push(num(s.sd));
            }
            row
        })
        .collect();
    Ok(vec![Artifact::csv("decomposition.csv", hash, &header, &table)?])
}
