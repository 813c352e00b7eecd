//! Seeded Gaussian stream scenarios: multi-source without drift, abrupt drift,
//! incremental drift, and a label-flipped source.
//!
//! Every class of every concept is an axis-aligned 2-D Gaussian. Streams emit
//! classes in strict alternation 0, 1, 0, 1, ...

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;
use crate::types::{ClassLabel, FeatureVector, LabeledExample};

/// Examples per class in every synthetic source stream.
pub const SOURCE_CLASS_SIZE: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGaussian {
    pub center: Vec<f64>,
    /// Diagonal of the covariance matrix.
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianConcept {
    classes: Vec<ClassGaussian>,
}

impl GaussianConcept {
    pub fn new(classes: Vec<ClassGaussian>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::InvalidParameter("a concept needs at least two classes".into()));
        }
        let dim = classes[0].center.len();
        for c in &classes {
            if c.center.len() != dim || c.variance.len() != dim {
                return Err(Error::InvalidParameter("inconsistent concept dimensions".into()));
            }
            if let Some(v) = c.variance.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidParameter(format!("covariance entry {v} must be > 0")));
            }
        }
        Ok(GaussianConcept { classes })
    }

    /// Two classes in 2-D with diagonal covariances.
    pub fn binary(c0: [f64; 2], v0: [f64; 2], c1: [f64; 2], v1: [f64; 2]) -> Result<Self> {
        GaussianConcept::new(vec![
            ClassGaussian {
                center: c0.to_vec(),
                variance: v0.to_vec(),
            },
            ClassGaussian {
                center: c1.to_vec(),
                variance: v1.to_vec(),
            },
        ])
    }

    pub fn classes(&self) -> &[ClassGaussian] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn num_features(&self) -> usize {
        self.classes[0].center.len()
    }

    /// The same Gaussians with class indices reversed.
    pub fn swapped(&self) -> Self {
        let mut classes = self.classes.clone();
        classes.reverse();
        GaussianConcept { classes }
    }
}

/// Standard normal pair by the Box–Muller transform.
fn box_muller<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    (r * angle.cos(), r * angle.sin())
}

pub fn sample_example<R: Rng + ?Sized>(
    concept: &GaussianConcept,
    label: ClassLabel,
    rng: &mut R,
    seq: u64,
) -> Result<LabeledExample> {
    let class = concept.classes.get(label.index()).ok_or(Error::LabelOutOfRange {
        label: label.index(),
        num_classes: concept.num_classes(),
    })?;
    let mut values = Vec::with_capacity(class.center.len());
    while values.len() < class.center.len() {
        let (a, b) = box_muller(rng);
        values.push(a);
        values.push(b);
    }
    values.truncate(class.center.len());
    for ((v, mu), var) in values.iter_mut().zip(&class.center).zip(&class.variance) {
        *v = mu + var.sqrt() * *v;
    }
    Ok(LabeledExample::new(FeatureVector::new(values)?, label, seq))
}

/// `per_class` examples of each class, alternating labels, seqs from `first_seq`.
pub fn sample_stream<R: Rng + ?Sized>(
    concept: &GaussianConcept,
    per_class: usize,
    rng: &mut R,
    first_seq: u64,
) -> Result<Vec<LabeledExample>> {
    let c = concept.num_classes();
    (0..per_class * c)
        .map(|i| sample_example(concept, ClassLabel(i % c), rng, first_seq + i as u64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Every source example is presented before the first target example.
    SourceFirst,
    /// All streams merged by `seq`; sources first on ties.
    Interleaved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    NoDrift,
    Abrupt,
    Incremental,
    FlippedSource,
    /// Loaded from CSV rather than generated.
    External,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::NoDrift => "no_drift",
            ScenarioKind::Abrupt => "abrupt",
            ScenarioKind::Incremental => "incremental",
            ScenarioKind::FlippedSource => "flipped_source",
            ScenarioKind::External => "external",
        })
    }
}

/// Source streams, a target stream with known drift points, and the presentation order.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub class_size: usize,
    pub seed: u64,
    pub sources: Vec<Vec<LabeledExample>>,
    pub target: Vec<LabeledExample>,
    /// Target indices at which a new concept starts.
    pub drift_points: Vec<usize>,
    pub protocol: Protocol,
    pub num_features: usize,
    pub num_classes: usize,
}

impl Scenario {
    /// Wraps recorded streams (no known drift points) and checks them.
    pub fn external(
        sources: Vec<Vec<LabeledExample>>,
        target: Vec<LabeledExample>,
        num_features: usize,
        num_classes: usize,
        protocol: Protocol,
    ) -> Result<Self> {
        let s = Scenario {
            kind: ScenarioKind::External,
            class_size: 0,
            seed: 0,
            sources,
            target,
            drift_points: Vec::new(),
            protocol,
            num_features,
            num_classes,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn name(&self) -> String {
        match self.kind {
            ScenarioKind::External => "external".to_string(),
            kind => format!("{kind}_{}", self.class_size),
        }
    }

    /// Same scenario with every source stream removed.
    pub fn without_sources(&self) -> Self {
        Scenario {
            sources: Vec::new(),
            ..self.clone()
        }
    }

    /// Keeps only the listed sources (1-based ordinals, renumbered in order).
    pub fn with_sources(&self, keep: &[usize]) -> Self {
        Scenario {
            sources: keep
                .iter()
                .filter_map(|&n| n.checked_sub(1).and_then(|i| self.sources.get(i)).cloned())
                .collect(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.drift_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("drift points must be strictly increasing".into()));
        }
        if self.drift_points.last().is_some_and(|&d| d >= self.target.len()) {
            return Err(Error::InvalidParameter("drift point beyond target length".into()));
        }
        for ex in self.sources.iter().flatten().chain(&self.target) {
            if ex.x.len() != self.num_features {
                return Err(Error::DimensionMismatch {
                    expected: self.num_features,
                    found: ex.x.len(),
                });
            }
            ClassLabel::checked(ex.y.index(), self.num_classes)?;
        }
        Ok(())
    }
}

/// Concept tables.
pub mod tables {
    use super::GaussianConcept;

    fn binary(c0: [f64; 2], v0: [f64; 2], c1: [f64; 2], v1: [f64; 2]) -> GaussianConcept {
        GaussianConcept::binary(c0, v0, c1, v1).expect("table parameters are valid")
    }

    pub fn no_drift_target() -> GaussianConcept {
        binary([2.0, 3.0], [2.0, 2.0], [7.0, 8.0], [2.0, 2.0])
    }

    pub fn no_drift_source_1() -> GaussianConcept {
        binary([-3.0, 6.0], [3.0, 2.0], [7.0, 8.0], [3.0, 2.0])
    }

    pub fn no_drift_source_2() -> GaussianConcept {
        binary([2.0, 1.0], [1.0, 2.0], [7.0, 8.0], [1.0, 2.0])
    }

    pub fn abrupt_before() -> GaussianConcept {
        binary([2.0, 3.0], [1.0, 2.0], [7.0, 8.0], [1.0, 2.0])
    }

    /// Also the abrupt scenario's source concept.
    pub fn abrupt_after() -> GaussianConcept {
        binary([2.0, 9.0], [1.0, 2.0], [5.0, 4.0], [1.0, 2.0])
    }

    /// Step `k` in 0..6 of the incremental drift: class 0 moves from (2,3)
    /// to (7,8) one unit per step while class 1 mirrors it.
    pub fn incremental_step(k: usize) -> GaussianConcept {
        assert!(k < 6, "incremental drift has six concepts");
        let k = k as f64;
        binary([2.0 + k, 3.0 + k], [1.0, 2.0], [7.0 - k, 8.0 - k], [1.0, 2.0])
    }
}

fn target_seed(seed: u64) -> u64 {
    seeding::derive_seed(seed, &[0])
}

fn source_seed(seed: u64, n: usize) -> u64 {
    seeding::derive_seed(seed, &[n as u64])
}

fn source_streams(concepts: &[GaussianConcept], seed: u64) -> Result<Vec<Vec<LabeledExample>>> {
    concepts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut rng = seeding::rng_from(source_seed(seed, i + 1));
            sample_stream(c, SOURCE_CLASS_SIZE, &mut rng, 0)
        })
        .collect()
}

fn check_class_size(class_size: usize) -> Result<()> {
    if class_size == 0 {
        return Err(Error::InvalidParameter("class size must be positive".into()));
    }
    Ok(())
}

pub fn build_no_drift(class_size: usize, seed: u64) -> Result<Scenario> {
    check_class_size(class_size)?;
    let mut rng = seeding::rng_from(target_seed(seed));
    let target = sample_stream(&tables::no_drift_target(), class_size, &mut rng, 0)?;
    Ok(Scenario {
        kind: ScenarioKind::NoDrift,
        class_size,
        seed,
        sources: source_streams(&[tables::no_drift_source_1(), tables::no_drift_source_2()], seed)?,
        target,
        drift_points: Vec::new(),
        protocol: Protocol::SourceFirst,
        num_features: 2,
        num_classes: 2,
    })
}

pub fn build_abrupt(class_size: usize, seed: u64) -> Result<Scenario> {
    check_class_size(class_size)?;
    let mut rng = seeding::rng_from(target_seed(seed));
    let mut target = sample_stream(&tables::abrupt_before(), class_size, &mut rng, 0)?;
    let drift = target.len();
    target.extend(sample_stream(&tables::abrupt_after(), class_size, &mut rng, drift as u64)?);
    Ok(Scenario {
        kind: ScenarioKind::Abrupt,
        class_size,
        seed,
        sources: source_streams(&[tables::abrupt_after()], seed)?,
        target,
        drift_points: vec![drift],
        protocol: Protocol::SourceFirst,
        num_features: 2,
        num_classes: 2,
    })
}

pub fn build_incremental(class_size: usize, seed: u64) -> Result<Scenario> {
    check_class_size(class_size)?;
    let concepts: Vec<GaussianConcept> = (0..6).map(tables::incremental_step).collect();
    let mut rng = seeding::rng_from(target_seed(seed));
    let mut target = Vec::with_capacity(6 * 2 * class_size);
    let mut drift_points = Vec::new();
    for (k, concept) in concepts.iter().enumerate() {
        if k > 0 {
            drift_points.push(target.len());
        }
        let first = target.len() as u64;
        target.extend(sample_stream(concept, class_size, &mut rng, first)?);
    }
    Ok(Scenario {
        kind: ScenarioKind::Incremental,
        class_size,
        seed,
        sources: source_streams(&concepts, seed)?,
        target,
        drift_points,
        protocol: Protocol::SourceFirst,
        num_features: 2,
        num_classes: 2,
    })
}

/// No-drift target with a single source whose class labels are swapped.
pub fn build_flipped_source(class_size: usize, seed: u64) -> Result<Scenario> {
    check_class_size(class_size)?;
    let concept = tables::no_drift_target();
    let mut rng = seeding::rng_from(target_seed(seed));
    let target = sample_stream(&concept, class_size, &mut rng, 0)?;
    Ok(Scenario {
        kind: ScenarioKind::FlippedSource,
        class_size,
        seed,
        sources: source_streams(&[concept.swapped()], seed)?,
        target,
        drift_points: Vec::new(),
        protocol: Protocol::SourceFirst,
        num_features: 2,
        num_classes: 2,
    })
}

pub fn build(kind: ScenarioKind, class_size: usize, seed: u64) -> Result<Scenario> {
    match kind {
        ScenarioKind::NoDrift => build_no_drift(class_size, seed),
        ScenarioKind::Abrupt => build_abrupt(class_size, seed),
        ScenarioKind::Incremental => build_incremental(class_size, seed),
        ScenarioKind::FlippedSource => build_flipped_source(class_size, seed),
        ScenarioKind::External => Err(Error::InvalidParameter(
            "external scenarios are loaded, not generated".into(),
        )),
    }
}
