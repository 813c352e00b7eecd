//! Experiment configuration: a TOML file with `[experiment]`, `[scenario]` and
//! one `[[approach]]` table per approach. Numeric approach parameters accept a
//! single value or an array; arrays span a grid (cartesian product).

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use melanie_core::approach::{ApproachSpec, SourceSelection};
use melanie_core::baselines::DwmConfig;
use melanie_core::datagen::{self, Protocol, Scenario, ScenarioKind};
use melanie_core::drift::DdmConfig;
use melanie_core::ensembles::{EnsembleConfig, EnsembleKind};
use melanie_core::ingestion::{self, GroupRule, StreamSchema};
use melanie_core::learners::{HoeffdingTreeConfig, LearnerConfig};
use melanie_core::melanie::MelanieConfig;
use melanie_core::seeding;

use crate::error::ConfigError;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSources {
    Named(String),
    Listed(Vec<i64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    experiment: RawExperiment,
    scenario: Spanned<RawScenario>,
    #[serde(default, rename = "approach")]
    approaches: Vec<Spanned<RawApproach>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: Option<String>,
    runs: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
    metric: Option<Spanned<String>>,
    window_fraction: Option<Spanned<f64>>,
    out: Option<PathBuf>,
    jobs: Option<Spanned<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: Spanned<String>,
    class_size: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
    protocol: Option<Spanned<String>>,
    path: Option<Spanned<PathBuf>>,
    features: Option<Spanned<Vec<String>>>,
    label: Option<Spanned<String>>,
    label_values: Option<Spanned<Vec<String>>>,
    group_column: Option<Spanned<String>>,
    rows_per_group: Option<Spanned<i64>>,
    split: Option<Spanned<String>>,
    source_fraction: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawApproach {
    name: Spanned<String>,
    kind: Spanned<String>,
    ensemble: Option<Spanned<String>>,
    learner: Option<Spanned<String>>,
    grace_period: Option<Spanned<i64>>,
    size: Option<Spanned<OneOrMany<i64>>>,
    theta: Option<Spanned<OneOrMany<f64>>>,
    delta: Option<Spanned<OneOrMany<f64>>>,
    lambda: Option<Spanned<OneOrMany<f64>>>,
    beta: Option<Spanned<OneOrMany<f64>>>,
    sources: Option<Spanned<RawSources>>,
    drift_detection: Option<Spanned<bool>>,
    period: Option<Spanned<i64>>,
    pooled: Option<Spanned<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Running,
    Window,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Running => "running",
            Metric::Window => "window",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "running" => Some(Metric::Running),
            "window" => Some(Metric::Window),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Similar,
    Prefix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvScenario {
    pub path: PathBuf,
    pub schema: StreamSchema,
    pub split: SplitKind,
    pub source_fraction: f64,
    pub protocol: Protocol,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSpec {
    Synthetic {
        kind: ScenarioKind,
        class_size: usize,
        seed: u64,
    },
    Csv(CsvScenario),
}

impl ScenarioSpec {
    pub fn num_sources(&self) -> usize {
        match self {
            ScenarioSpec::Synthetic { kind, .. } => match kind {
                ScenarioKind::NoDrift => 2,
                ScenarioKind::Incremental => 6,
                _ => 1,
            },
            ScenarioSpec::Csv(_) => 1,
        }
    }

    pub fn build(&self) -> melanie_core::Result<Scenario> {
        match self {
            ScenarioSpec::Synthetic {
                kind,
                class_size,
                seed,
            } => datagen::build(*kind, *class_size, *seed),
            ScenarioSpec::Csv(c) => {
                let stream = ingestion::read_stream(&c.path, &c.schema)?;
                let (source, target) = match c.split {
                    SplitKind::Similar => {
                        ingestion::similar_split(&stream, c.source_fraction, &mut seeding::rng_from(c.seed))?
                    }
                    SplitKind::Prefix => ingestion::prefix_split(&stream, c.source_fraction)?,
                };
                Scenario::external(
                    vec![source],
                    target,
                    c.schema.features.len(),
                    c.schema.label_values.len(),
                    c.protocol,
                )
            }
        }
    }
}

/// One point of an approach's parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    /// `name` alone, or `name[key=value;…]` listing the parameters that vary.
    pub label: String,
    pub params: BTreeMap<String, f64>,
    pub spec: ApproachSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproachEntry {
    pub name: String,
    pub points: Vec<GridPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub runs: usize,
    pub seed: u64,
    pub metric: Metric,
    pub window_fraction: f64,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub scenario: ScenarioSpec,
    pub approaches: Vec<ApproachEntry>,
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn err<T>(&self, span: Range<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError::new(Some(self.line(span)), message))
    }
}

fn unit_interval(src: &Source, value: &Spanned<OneOrMany<f64>>, name: &str) -> Result<Vec<f64>, ConfigError> {
    let values = value.get_ref().values();
    if values.is_empty() {
        return src.err(value.span(), format!("`{name}` grid is empty"));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return src.err(value.span(), format!("`{name}` = {v} is outside [0, 1]"));
    }
    Ok(values)
}

fn positive(src: &Source, value: &Spanned<i64>, name: &str) -> Result<usize, ConfigError> {
    match usize::try_from(*value.get_ref()) {
        Ok(v) if v >= 1 => Ok(v),
        _ => src.err(value.span(), format!("`{name}` must be a positive integer, got {}", value.get_ref())),
    }
}

fn non_negative_seed(src: &Source, value: &Spanned<i64>) -> Result<u64, ConfigError> {
    u64::try_from(*value.get_ref()).or_else(|_| src.err(value.span(), "seeds must be non-negative"))
}

pub fn parse(text: &str, base_dir: &Path) -> Result<ExperimentConfig, ConfigError> {
    let src = Source { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| src.line(s));
        ConfigError::new(line, e.message().trim().to_string())
    })?;

    let exp = &raw.experiment;
    let runs = match &exp.runs {
        Some(r) => positive(&src, r, "runs")?,
        None => 30,
    };
    let seed = match &exp.seed {
        Some(s) => non_negative_seed(&src, s)?,
        None => 0,
    };
    let metric = match &exp.metric {
        Some(m) => match Metric::parse(m.get_ref()) {
            Some(metric) => metric,
            None => return src.err(m.span(), format!("unknown metric `{}` (running, window)", m.get_ref())),
        },
        None => Metric::Running,
    };
    let window_fraction = match &exp.window_fraction {
        Some(w) => {
            let v = *w.get_ref();
            if !(v > 0.0 && v <= 1.0) {
                return src.err(w.span(), format!("`window_fraction` = {v} is outside (0, 1]"));
            }
            v
        }
        None => melanie_core::evaluation::DEFAULT_WINDOW_FRACTION,
    };
    let jobs = exp.jobs.as_ref().map(|j| positive(&src, j, "jobs")).transpose()?;

    let scenario = parse_scenario(&src, &raw.scenario, base_dir)?;
    if raw.approaches.is_empty() {
        return Err(ConfigError::new(None, "no [[approach]] tables"));
    }
    let mut approaches: Vec<ApproachEntry> = Vec::new();
    for a in &raw.approaches {
        let entry = parse_approach(&src, a.get_ref(), scenario.num_sources())?;
        if approaches.iter().any(|e| e.name == entry.name) {
            return src.err(a.get_ref().name.span(), format!("duplicate approach name `{}`", entry.name));
        }
        approaches.push(entry);
    }

    Ok(ExperimentConfig {
        name: exp.name.clone().unwrap_or_else(|| "experiment".into()),
        runs,
        seed,
        metric,
        window_fraction,
        out: exp.out.as_ref().map(|p| base_dir.join(p)),
        jobs,
        scenario,
        approaches,
    })
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(None, format!("cannot read config: {e}")))?;
    parse(&text, path.parent().unwrap_or(Path::new(".")))
}

fn parse_scenario(src: &Source, raw: &Spanned<RawScenario>, base_dir: &Path) -> Result<ScenarioSpec, ConfigError> {
    let s = raw.get_ref();
    let seed = s.seed.as_ref().map(|v| non_negative_seed(src, v)).transpose()?.unwrap_or(0);
    let synthetic = match s.kind.get_ref().as_str() {
        "no_drift" => Some(ScenarioKind::NoDrift),
        "abrupt" => Some(ScenarioKind::Abrupt),
        "incremental" => Some(ScenarioKind::Incremental),
        "flipped_source" => Some(ScenarioKind::FlippedSource),
        "csv" => None,
        other => {
            return src.err(
                s.kind.span(),
                format!("unknown scenario kind `{other}` (no_drift, abrupt, incremental, flipped_source, csv)"),
            )
        }
    };
    if let Some(kind) = synthetic {
        let csv_only = [
            ("path", s.path.as_ref().map(Spanned::span)),
            ("features", s.features.as_ref().map(Spanned::span)),
            ("label", s.label.as_ref().map(Spanned::span)),
            ("label_values", s.label_values.as_ref().map(Spanned::span)),
            ("group_column", s.group_column.as_ref().map(Spanned::span)),
            ("rows_per_group", s.rows_per_group.as_ref().map(Spanned::span)),
            ("split", s.split.as_ref().map(Spanned::span)),
            ("source_fraction", s.source_fraction.as_ref().map(Spanned::span)),
            ("protocol", s.protocol.as_ref().map(Spanned::span)),
        ];
        if let Some((key, Some(span))) = csv_only.into_iter().find(|(_, span)| span.is_some()) {
            return src.err(span, format!("`{key}` only applies to csv scenarios"));
        }
        let class_size = match &s.class_size {
            Some(c) => positive(src, c, "class_size")?,
            None => return src.err(raw.span(), "synthetic scenarios need `class_size`"),
        };
        return Ok(ScenarioSpec::Synthetic { kind, class_size, seed });
    }

    if let Some(c) = &s.class_size {
        return src.err(c.span(), "`class_size` only applies to synthetic scenarios");
    }
    let required = |name: &str, present: bool| {
        if present {
            Ok(())
        } else {
            src.err(raw.span(), format!("csv scenarios need `{name}`"))
        }
    };
    required("path", s.path.is_some())?;
    required("features", s.features.is_some())?;
    required("label", s.label.is_some())?;
    required("label_values", s.label_values.is_some())?;
    required("source_fraction", s.source_fraction.is_some())?;

    let group = match (&s.group_column, &s.rows_per_group) {
        (Some(c), Some(_)) => return src.err(c.span(), "give either `group_column` or `rows_per_group`, not both"),
        (Some(c), None) => GroupRule::Column(c.get_ref().clone()),
        (None, Some(n)) => GroupRule::RowsPerGroup(positive(src, n, "rows_per_group")?),
        (None, None) => GroupRule::None,
    };
    let split = match s.split.as_ref().map(|v| (v.get_ref().as_str(), v.span())) {
        None | Some(("similar", _)) => SplitKind::Similar,
        Some(("prefix", _)) => SplitKind::Prefix,
        Some((other, span)) => return src.err(span, format!("unknown split `{other}` (similar, prefix)")),
    };
    if split == SplitKind::Similar && group == GroupRule::None {
        return src.err(raw.span(), "the similar split needs `group_column` or `rows_per_group`");
    }
    let fraction = s.source_fraction.as_ref().expect("checked above");
    if !(0.0..1.0).contains(fraction.get_ref()) {
        return src.err(fraction.span(), format!("`source_fraction` = {} is outside [0, 1)", fraction.get_ref()));
    }
    let protocol = match s.protocol.as_ref().map(|v| (v.get_ref().as_str(), v.span())) {
        None | Some(("interleaved", _)) => Protocol::Interleaved,
        Some(("source_first", _)) => Protocol::SourceFirst,
        Some((other, span)) => {
            return src.err(span, format!("unknown protocol `{other}` (interleaved, source_first)"))
        }
    };
    let schema = StreamSchema {
        features: s.features.as_ref().expect("checked above").get_ref().clone(),
        label: s.label.as_ref().expect("checked above").get_ref().clone(),
        label_values: s.label_values.as_ref().expect("checked above").get_ref().clone(),
        group,
    };
    if let Err(e) = schema.validate() {
        return src.err(raw.span(), e.to_string());
    }
    Ok(ScenarioSpec::Csv(CsvScenario {
        path: base_dir.join(s.path.as_ref().expect("checked above").get_ref()),
        schema,
        split,
        source_fraction: *fraction.get_ref(),
        protocol,
        seed,
    }))
}

const APPROACH_KINDS: &str = "melanie, ensemble, ddm, dwm";

fn parse_approach(src: &Source, a: &RawApproach, num_sources: usize) -> Result<ApproachEntry, ConfigError> {
    let name = a.name.get_ref().trim().to_string();
    if name.is_empty() || name.contains(['[', ']', ',', '"', '\n']) {
        return src.err(a.name.span(), format!("invalid approach name `{name}`"));
    }
    let kind = a.kind.get_ref().as_str();
    let allowed: &[&str] = match kind {
        "melanie" => &["ensemble", "learner", "grace_period", "size", "theta", "delta", "lambda", "sources", "drift_detection"],
        "ensemble" | "ddm" => &["ensemble", "learner", "grace_period", "size", "pooled"],
        "dwm" => &["learner", "grace_period", "beta", "period", "pooled"],
        other => return src.err(a.kind.span(), format!("unknown approach kind `{other}` ({APPROACH_KINDS})")),
    };
    let present = [
        ("ensemble", a.ensemble.as_ref().map(Spanned::span)),
        ("learner", a.learner.as_ref().map(Spanned::span)),
        ("grace_period", a.grace_period.as_ref().map(Spanned::span)),
        ("size", a.size.as_ref().map(Spanned::span)),
        ("theta", a.theta.as_ref().map(Spanned::span)),
        ("delta", a.delta.as_ref().map(Spanned::span)),
        ("lambda", a.lambda.as_ref().map(Spanned::span)),
        ("beta", a.beta.as_ref().map(Spanned::span)),
        ("sources", a.sources.as_ref().map(Spanned::span)),
        ("drift_detection", a.drift_detection.as_ref().map(Spanned::span)),
        ("period", a.period.as_ref().map(Spanned::span)),
        ("pooled", a.pooled.as_ref().map(Spanned::span)),
    ];
    for (key, span) in present {
        if let Some(span) = span {
            if !allowed.contains(&key) {
                return src.err(span, format!("`{key}` does not apply to `{kind}` approaches"));
            }
        }
    }

    let learner = match a.learner.as_ref().map(|l| (l.get_ref().as_str(), l.span())) {
        None | Some(("hoeffding_tree", _)) => {
            let mut cfg = HoeffdingTreeConfig::default();
            if let Some(g) = &a.grace_period {
                cfg.grace_period = positive(src, g, "grace_period")? as u64;
            }
            LearnerConfig::HoeffdingTree(cfg)
        }
        Some(("naive_bayes", _)) => {
            if let Some(g) = &a.grace_period {
                return src.err(g.span(), "`grace_period` only applies to the hoeffding_tree learner");
            }
            LearnerConfig::NaiveBayes
        }
        Some((other, span)) => {
            return src.err(span, format!("unknown learner `{other}` (hoeffding_tree, naive_bayes)"))
        }
    };
    let ensemble_kind = match a.ensemble.as_ref().map(|e| (e.get_ref().as_str(), e.span())) {
        None | Some(("bagging", _)) => EnsembleKind::Bagging,
        Some(("boosting", _)) => EnsembleKind::Boosting,
        Some((other, span)) => return src.err(span, format!("unknown ensemble `{other}` (bagging, boosting)")),
    };
    let sizes = match &a.size {
        Some(s) => {
            let values = s.get_ref().values();
            if values.is_empty() {
                return src.err(s.span(), "`size` grid is empty");
            }
            let mut out = Vec::new();
            for v in values {
                match usize::try_from(v) {
                    Ok(k) if k >= 1 => out.push(k),
                    _ => return src.err(s.span(), format!("`size` = {v} must be at least 1")),
                }
            }
            out
        }
        None => vec![10],
    };
    let grid = |value: &Option<Spanned<OneOrMany<f64>>>, name: &str, default: f64| match value {
        Some(v) => unit_interval(src, v, name),
        None => Ok(vec![default]),
    };
    let pooled = a.pooled.as_ref().is_some_and(|p| *p.get_ref());

    let mut points = Vec::new();
    match kind {
        "melanie" => {
            let sources = match a.sources.as_ref().map(|s| (s.get_ref(), s.span())) {
                None => SourceSelection::All,
                Some((RawSources::Named(n), span)) => match n.as_str() {
                    "all" => SourceSelection::All,
                    "none" => SourceSelection::None,
                    other => return src.err(span, format!("unknown sources `{other}` (all, none, or a list)")),
                },
                Some((RawSources::Listed(list), span)) => {
                    let mut keep = Vec::new();
                    for &n in list {
                        match usize::try_from(n) {
                            Ok(i) if (1..=num_sources).contains(&i) && !keep.contains(&i) => keep.push(i),
                            _ => {
                                return src.err(
                                    span,
                                    format!("source {n} is not one of 1..={num_sources} (or is repeated)"),
                                )
                            }
                        }
                    }
                    SourceSelection::Only(keep)
                }
            };
            let drift = a.drift_detection.as_ref().is_none_or(|d| *d.get_ref());
            let thetas = grid(&a.theta, "theta", 0.9)?;
            let deltas = grid(&a.delta, "delta", 0.05)?;
            let lambdas = grid(&a.lambda, "lambda", 0.5)?;
            for &size in &sizes {
                for &theta in &thetas {
                    for &delta in &deltas {
                        for &lambda in &lambdas {
                            let config = MelanieConfig {
                                theta,
                                delta,
                                lambda,
                                ensemble: EnsembleConfig::new(ensemble_kind, size, learner),
                                drift: drift.then(DdmConfig::default),
                            };
                            let params = BTreeMap::from([
                                ("size".to_string(), size as f64),
                                ("theta".to_string(), theta),
                                ("delta".to_string(), delta),
                                ("lambda".to_string(), lambda),
                            ]);
                            points.push((
                                params,
                                ApproachSpec::Melanie {
                                    config,
                                    sources: sources.clone(),
                                },
                            ));
                        }
                    }
                }
            }
        }
        "ensemble" | "ddm" => {
            for &size in &sizes {
                let ensemble = EnsembleConfig::new(ensemble_kind, size, learner);
                let spec = if kind == "ensemble" {
                    ApproachSpec::Ensemble { ensemble, pooled }
                } else {
                    ApproachSpec::DdmEnsemble {
                        ensemble,
                        ddm: DdmConfig::default(),
                        pooled,
                    }
                };
                points.push((BTreeMap::from([("size".to_string(), size as f64)]), spec));
            }
        }
        _ => {
            let period = a.period.as_ref().map(|p| positive(src, p, "period")).transpose()?.unwrap_or(1);
            for beta in grid(&a.beta, "beta", 0.5)? {
                let config = DwmConfig {
                    period: period as u64,
                    ..DwmConfig::new(beta, learner)
                };
                points.push((
                    BTreeMap::from([("beta".to_string(), beta)]),
                    ApproachSpec::Dwm { config, pooled },
                ));
            }
        }
    }

    // label each point by the parameters that take more than one value
    let varying: Vec<String> = points
        .first()
        .map(|(p, _)| p.keys().cloned().collect::<Vec<_>>())
        .unwrap_or_default()
        .into_iter()
        .filter(|k| points.iter().any(|(p, _)| p[k] != points[0].0[k]))
        .collect();
    let points = points
        .into_iter()
        .map(|(params, spec)| {
            let label = if varying.is_empty() {
                name.clone()
            } else {
                let parts: Vec<String> = varying.iter().map(|k| format!("{k}={}", params[k])).collect();
                format!("{name}[{}]", parts.join(";"))
            };
            GridPoint { label, params, spec }
        })
        .collect();
    Ok(ApproachEntry { name, points })
}
