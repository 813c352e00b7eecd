use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approach::{ApproachSpec, StreamLearner};
use crate::datagen::{Protocol, Scenario};
use crate::error::{Error, Result};
use crate::types::StreamId;

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub seq: u64,
    pub correct: bool,
    /// Accuracy since the start of the current segment, this point included.
    pub running: f64,
}

/// Per-target-example outcomes with accuracy counters restarted at each drift point.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AccuracyTrace {
    pub points: Vec<TracePoint>,
    pub boundaries: Vec<usize>,
}

impl AccuracyTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn correct_flags(&self) -> Vec<bool> {
        self.points.iter().map(|p| p.correct).collect()
    }

    pub fn running(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.running).collect()
    }

    /// Fraction correct over target indices `range`.
    pub fn accuracy_over(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.points[range];
        if slice.is_empty() {
            return 0.0;
        }
        slice.iter().filter(|p| p.correct).count() as f64 / slice.len() as f64
    }

    pub fn overall_accuracy(&self) -> f64 {
        self.accuracy_over(0..self.len())
    }

    pub fn final_running(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.running)
    }
}

enum Event {
    Source(usize, usize),
    Target(usize),
}

fn schedule(scenario: &Scenario, with_sources: bool) -> Vec<Event> {
    let mut events = Vec::new();
    if with_sources {
        for (s, stream) in scenario.sources.iter().enumerate() {
            events.extend((0..stream.len()).map(|i| (stream[i].seq, 0usize, Event::Source(s, i))));
        }
    }
    let targets = (0..scenario.target.len()).map(|i| (scenario.target[i].seq, 1usize, Event::Target(i)));
    match scenario.protocol {
        Protocol::SourceFirst => {
            let mut ordered: Vec<Event> = events.into_iter().map(|(.., e)| e).collect();
            ordered.extend(targets.map(|(.., e)| e));
            ordered
        }
        Protocol::Interleaved => {
            events.extend(targets);
            // stable: equal seqs keep source order, sources before target
            events.sort_by_key(|&(seq, rank, _)| (seq, rank));
            events.into_iter().map(|(.., e)| e).collect()
        }
    }
}

pub fn prequential_run<L: StreamLearner>(learner: &mut L, scenario: &Scenario) -> Result<AccuracyTrace> {
    prequential_run_observed(learner, scenario, |_, _| {})
}

/// Test-then-train over the scenario; `after_target(learner, t)` runs after target example `t` is learned.
pub fn prequential_run_observed<L, F>(
    learner: &mut L,
    scenario: &Scenario,
    mut after_target: F,
) -> Result<AccuracyTrace>
where
    L: StreamLearner,
    F: FnMut(&L, usize),
{
    let mut trace = AccuracyTrace {
        points: Vec::with_capacity(scenario.target.len()),
        boundaries: scenario.drift_points.clone(),
    };
    let mut next_boundary = scenario.drift_points.iter().peekable();
    let (mut hits, mut seen) = (0u64, 0u64);
    for event in schedule(scenario, learner.consumes_sources()) {
        match event {
            Event::Source(s, i) => learner.observe(StreamId::Source(s + 1), &scenario.sources[s][i])?,
            Event::Target(t) => {
                let ex = &scenario.target[t];
                if ex.x.len() != scenario.num_features {
                    return Err(Error::DimensionMismatch {
                        expected: scenario.num_features,
                        found: ex.x.len(),
                    });
                }
                if next_boundary.peek().is_some_and(|&&b| b == t) {
                    next_boundary.next();
                    hits = 0;
                    seen = 0;
                }
                let correct = learner.predict(&ex.x) == ex.y;
                seen += 1;
                hits += u64::from(correct);
                trace.points.push(TracePoint {
                    seq: ex.seq,
                    correct,
                    running: hits as f64 / seen as f64,
                });
                learner.observe(StreamId::Target, ex)?;
                after_target(learner, t);
            }
        }
    }
    Ok(trace)
}

/// Mean of the correct flags over the last min(w, t+1) examples, w = floor(fraction · len).
pub fn window_accuracy(trace: &AccuracyTrace, fraction: f64) -> Result<Vec<f64>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "window fraction {fraction} outside (0, 1]"
        )));
    }
    let w = ((fraction * trace.len() as f64 + 1e-9).floor() as usize).max(1);
    Ok(window_accuracy_sized(&trace.correct_flags(), w))
}

pub fn window_accuracy_sized(flags: &[bool], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(flags.len());
    let mut hits = 0usize;
    for (t, &c) in flags.iter().enumerate() {
        hits += usize::from(c);
        if t >= window {
            hits -= usize::from(flags[t - window]);
        }
        out.push(hits as f64 / (t + 1).min(window) as f64);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub overall_accuracy: f64,
    pub final_running: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSet {
    pub traces: Vec<AccuracyTrace>,
    pub summaries: Vec<RunSummary>,
    /// True when the approach is deterministic and was executed once.
    pub deterministic: bool,
}

impl RunSet {
    fn mean_of(&self, series: impl Fn(&AccuracyTrace) -> Vec<f64>) -> Vec<f64> {
        let Some(first) = self.traces.first() else {
            return Vec::new();
        };
        let mut sum = vec![0.0; first.len()];
        for trace in &self.traces {
            for (s, v) in sum.iter_mut().zip(series(trace)) {
                *s += v;
            }
        }
        let n = self.traces.len() as f64;
        sum.into_iter().map(|s| s / n).collect()
    }

    /// Per-index mean of the drift-reset running accuracy.
    pub fn mean_running(&self) -> Vec<f64> {
        self.mean_of(AccuracyTrace::running)
    }

    pub fn mean_window(&self, fraction: f64) -> Result<Vec<f64>> {
        window_accuracy(self.traces.first().unwrap_or(&AccuracyTrace::default()), fraction)?;
        Ok(self.mean_of(|t| window_accuracy(t, fraction).expect("fraction validated")))
    }

    /// Per-run accuracy over target indices `range`.
    pub fn accuracy_over(&self, range: std::ops::Range<usize>) -> Vec<f64> {
        self.traces.iter().map(|t| t.accuracy_over(range.clone())).collect()
    }
}

/// Runs `runs` independent replications with approach seeds `base_seed + r`, in parallel.
/// The scenario is shared; deterministic approaches run once.
pub fn replicate(spec: &ApproachSpec, scenario: &Scenario, runs: usize, base_seed: u64) -> Result<RunSet> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    spec.validate()?;
    let view = spec.view(scenario);
    let deterministic = !spec.is_stochastic();
    let runs = if deterministic { 1 } else { runs };
    let results: Vec<Result<(RunSummary, AccuracyTrace)>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let seed = base_seed.wrapping_add(r as u64);
            let mut learner = spec.build(view.num_features, view.num_classes, seed)?;
            let trace = prequential_run(&mut learner, &view)?;
            Ok((
                RunSummary {
                    run: r,
                    seed,
                    overall_accuracy: trace.overall_accuracy(),
                    final_running: trace.final_running(),
                },
                trace,
            ))
        })
        .collect();
    let mut traces = Vec::with_capacity(runs);
    let mut summaries = Vec::with_capacity(runs);
    for r in results {
        let (s, t) = r?;
        summaries.push(s);
        traces.push(t);
    }
    Ok(RunSet {
        traces,
        summaries,
        deterministic,
    })
}
