//! `run`: replicate every grid point of every approach on the configured scenario.

use std::path::Path;

use rayon::prelude::*;

use melanie_core::datagen::Scenario;
use melanie_core::evaluation::{replicate, window_accuracy, RunSet};

use crate::config::{ExperimentConfig, GridPoint, ScenarioSpec};
use crate::error::CliError;
use crate::output::{
    fixed6, write_csv, write_json, ApproachInfo, GridSummaryRow, ResultRow, RunMetadata, ScenarioInfo, FRIEDMAN_UNIT,
    GRID_SUMMARY_FILE, METADATA_FILE, RESULTS_FILE,
};

fn mean_accuracy(set: &RunSet) -> f64 {
    set.summaries.iter().map(|s| s.overall_accuracy).sum::<f64>() / set.summaries.len() as f64
}

fn result_rows(scenario: &str, label: &str, set: &RunSet, window_fraction: f64) -> Result<Vec<ResultRow>, CliError> {
    let mut rows = Vec::new();
    for (run, trace) in set.traces.iter().enumerate() {
        let window = window_accuracy(trace, window_fraction)?;
        for (point, w) in trace.points.iter().zip(window) {
            rows.push(ResultRow {
                scenario: scenario.to_string(),
                approach: label.to_string(),
                run,
                seq: point.seq,
                correct: u8::from(point.correct),
                acc_running: fixed6(point.running),
                acc_window: fixed6(w),
            });
        }
    }
    Ok(rows)
}

fn scenario_info(spec: &ScenarioSpec, scenario: &Scenario) -> ScenarioInfo {
    let (class_size, seed) = match spec {
        ScenarioSpec::Synthetic { class_size, seed, .. } => (*class_size, *seed),
        ScenarioSpec::Csv(c) => (0, c.seed),
    };
    ScenarioInfo {
        name: scenario.name(),
        kind: scenario.kind.to_string(),
        class_size,
        seed,
        drift_points: scenario.drift_points.clone(),
        target_length: scenario.target.len(),
        sources: scenario.sources.len(),
    }
}

/// Runs the experiment and writes results, grid summary and metadata into `out`.
pub fn run(config: &ExperimentConfig, seed: Option<u64>, jobs: Option<usize>, out: &Path) -> Result<RunMetadata, CliError> {
    let scenario = config.scenario.build()?;
    let base_seed = seed.unwrap_or(config.seed);
    let points: Vec<(&str, &GridPoint)> = config
        .approaches
        .iter()
        .flat_map(|a| a.points.iter().map(move |p| (a.name.as_str(), p)))
        .collect();

    let work = || {
        points
            .par_iter()
            .map(|(_, p)| replicate(&p.spec, &scenario, config.runs, base_seed))
            .collect::<Vec<_>>()
    };
    let sets = match jobs.or(config.jobs) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Data(format!("cannot start {n} workers: {e}")))?
            .install(work),
        None => work(),
    };
    let sets = sets.into_iter().collect::<Result<Vec<_>, _>>()?;

    let name = scenario.name();
    let mut rows = Vec::new();
    let mut approaches = Vec::new();
    for ((entry, point), set) in points.iter().zip(&sets) {
        rows.extend(result_rows(&name, &point.label, set, config.window_fraction)?);
        approaches.push(ApproachInfo {
            label: point.label.clone(),
            name: entry.to_string(),
            params: point.params.clone(),
            deterministic: set.deterministic,
            runs: set.traces.len(),
            mean_accuracy: mean_accuracy(set),
            best: false,
        });
    }
    // best grid point per approach by mean accuracy; the first wins ties
    for entry in &config.approaches {
        let best = approaches
            .iter()
            .enumerate()
            .filter(|(_, a)| a.name == entry.name)
            .fold(None::<(usize, f64)>, |acc, (i, a)| match acc {
                Some((_, m)) if m >= a.mean_accuracy => acc,
                _ => Some((i, a.mean_accuracy)),
            });
        if let Some((i, _)) = best {
            approaches[i].best = true;
        }
    }
    let summary: Vec<GridSummaryRow> = approaches
        .iter()
        .map(|a| GridSummaryRow {
            scenario: name.clone(),
            approach: a.name.clone(),
            grid_point: a.label.clone(),
            mean_accuracy: fixed6(a.mean_accuracy),
            best: a.best,
        })
        .collect();
    let metadata = RunMetadata {
        experiment: config.name.clone(),
        scenario: scenario_info(&config.scenario, &scenario),
        runs: config.runs,
        base_seed,
        metric: config.metric.as_str().to_string(),
        window_fraction: config.window_fraction,
        friedman_unit: FRIEDMAN_UNIT.to_string(),
        approaches,
    };

    write_csv(&out.join(RESULTS_FILE), &rows)?;
    write_csv(&out.join(GRID_SUMMARY_FILE), &summary)?;
    write_json(&out.join(METADATA_FILE), &metadata)?;
    Ok(metadata)
}
