//! Hoeffding tree (VFDT) over numeric attributes.
//!
//! Each leaf keeps, per attribute, a Gaussian summary of the values seen for
//! every class together with the observed per-class range. Split candidates are
//! equally spaced thresholds inside that range, and the class mass falling on
//! either side of a threshold is estimated from the Gaussian CDF.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ClassDistribution, LabeledExample};

use super::{IncrementalClassifier, RunningGaussian};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoeffdingTreeConfig {
    /// δ in the Hoeffding bound.
    pub split_confidence: f64,
    /// Examples a leaf accumulates between split attempts. `u64::MAX` disables splitting.
    pub grace_period: u64,
    pub tie_threshold: f64,
    pub max_depth: usize,
    /// Candidate thresholds per attribute.
    pub num_candidates: usize,
}

impl Default for HoeffdingTreeConfig {
    fn default() -> Self {
        HoeffdingTreeConfig {
            split_confidence: 1e-7,
            grace_period: 200,
            tie_threshold: 0.05,
            max_depth: 20,
            num_candidates: 10,
        }
    }
}

/// ε = sqrt(R² ln(1/δ) / 2n).
pub fn hoeffding_bound(range: f64, delta: f64, n: f64) -> Result<f64> {
    let valid = range > 0.0 && delta > 0.0 && delta < 1.0 && n >= 1.0;
    if !valid {
        return Err(Error::InvalidParameter(format!(
            "hoeffding bound needs R > 0, 0 < δ < 1, n ≥ 1 (got R={range}, δ={delta}, n={n})"
        )));
    }
    Ok((range * range * (1.0 / delta).ln() / (2.0 * n)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
struct AttributeObserver {
    per_class: Vec<RunningGaussian>,
    min: Vec<f64>,
    max: Vec<f64>,
}

impl AttributeObserver {
    fn new(num_classes: usize) -> Self {
        AttributeObserver {
            per_class: vec![RunningGaussian::new(); num_classes],
            min: vec![f64::INFINITY; num_classes],
            max: vec![f64::NEG_INFINITY; num_classes],
        }
    }

    fn observe(&mut self, class: usize, v: f64, weight: f64) -> Result<()> {
        self.per_class[class].update_weighted(v, weight)?;
        self.min[class] = self.min[class].min(v);
        self.max[class] = self.max[class].max(v);
        Ok(())
    }

    fn class_mass(&self) -> Vec<f64> {
        self.per_class.iter().map(|g| g.count()).collect()
    }

    /// Observed range intersected with the union of mean ± 3σ intervals.
    fn candidate_range(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut lo_gauss = f64::INFINITY;
        let mut hi_gauss = f64::NEG_INFINITY;
        for (c, g) in self.per_class.iter().enumerate() {
            if g.count() <= 0.0 {
                continue;
            }
            lo = lo.min(self.min[c]);
            hi = hi.max(self.max[c]);
            let spread = 3.0 * g.std_dev();
            lo_gauss = lo_gauss.min(g.mean() - spread);
            hi_gauss = hi_gauss.max(g.mean() + spread);
        }
        let lo = lo.max(lo_gauss);
        let hi = hi.min(hi_gauss);
        (lo < hi).then_some((lo, hi))
    }

    /// Estimated per-class mass with value ≤ `threshold`, and the complement.
    fn split_mass(&self, threshold: f64) -> (Vec<f64>, Vec<f64>) {
        let mut left = Vec::with_capacity(self.per_class.len());
        let mut right = Vec::with_capacity(self.per_class.len());
        for (c, g) in self.per_class.iter().enumerate() {
            let n = g.count();
            let l = if n == 0.0 || threshold < self.min[c] {
                0.0
            } else if threshold >= self.max[c] {
                n
            } else {
                n * g.cdf(threshold)
            };
            left.push(l);
            right.push(n - l);
        }
        (left, right)
    }
}

fn entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

fn info_gain(parent: &[f64], left: &[f64], right: &[f64]) -> f64 {
    let n: f64 = parent.iter().sum();
    let nl: f64 = left.iter().sum();
    let nr: f64 = right.iter().sum();
    if n <= 0.0 {
        return 0.0;
    }
    entropy(parent) - (nl / n) * entropy(left) - (nr / n) * entropy(right)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    class_counts: Vec<f64>,
    observers: Vec<AttributeObserver>,
    weight_at_last_attempt: f64,
    depth: usize,
}

impl Leaf {
    fn new(class_counts: Vec<f64>, num_features: usize, depth: usize) -> Self {
        let num_classes = class_counts.len();
        let initial: f64 = class_counts.iter().sum();
        Leaf {
            class_counts,
            observers: vec![AttributeObserver::new(num_classes); num_features],
            weight_at_last_attempt: initial,
            depth,
        }
    }

    pub fn class_counts(&self) -> &[f64] {
        &self.class_counts
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn total(&self) -> f64 {
        self.class_counts.iter().sum()
    }

    fn is_pure(&self) -> bool {
        self.class_counts.iter().filter(|&&c| c > 0.0).count() < 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf(Leaf),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    left: Vec<f64>,
    right: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoeffdingTree {
    config: HoeffdingTreeConfig,
    num_features: usize,
    num_classes: usize,
    /// Arena; index 0 is the root.
    nodes: Vec<Node>,
}

impl HoeffdingTree {
    pub fn new(num_features: usize, num_classes: usize, config: HoeffdingTreeConfig) -> Self {
        HoeffdingTree {
            config,
            num_features,
            num_classes,
            nodes: vec![Node::Leaf(Leaf::new(vec![0.0; num_classes], num_features, 0))],
        }
    }

    pub fn config(&self) -> &HoeffdingTreeConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn depth(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(l) => Some(l.depth),
                Node::Split { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    fn leaf_index(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf(_) => return idx,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_for(&self, x: &[f64]) -> &Leaf {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf(l) => l,
            Node::Split { .. } => unreachable!("leaf_index always stops on a leaf"),
        }
    }

    fn best_candidates(&self, leaf: &Leaf) -> Vec<Candidate> {
        let mut best_per_feature = Vec::new();
        for (feature, obs) in leaf.observers.iter().enumerate() {
            let Some((lo, hi)) = obs.candidate_range() else {
                continue;
            };
            let parent = obs.class_mass();
            let steps = self.config.num_candidates;
            let width = (hi - lo) / (steps + 1) as f64;
            let mut best: Option<Candidate> = None;
            for i in 1..=steps {
                let threshold = lo + width * i as f64;
                let (left, right) = obs.split_mass(threshold);
                let gain = info_gain(&parent, &left, &right);
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Candidate {
                        feature,
                        threshold,
                        gain,
                        left,
                        right,
                    });
                }
            }
            best_per_feature.extend(best);
        }
        best_per_feature.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.feature.cmp(&b.feature)));
        best_per_feature
    }

    fn attempt_split(&mut self, idx: usize) -> Result<()> {
        let Node::Leaf(leaf) = &self.nodes[idx] else {
            return Ok(());
        };
        let candidates = self.best_candidates(leaf);
        let Some(best) = candidates.first() else {
            return Ok(());
        };
        // the null split (gain 0) is always a competitor
        let second = candidates.get(1).map_or(0.0, |c| c.gain.max(0.0));
        let range = (self.num_classes as f64).log2();
        let n = leaf.total();
        let eps = hoeffding_bound(range, self.config.split_confidence, n.max(1.0))?;
        if best.gain > 0.0 && (best.gain - second > eps || eps < self.config.tie_threshold) {
            let depth = leaf.depth + 1;
            let left = self.nodes.len();
            let right = left + 1;
            let (feature, threshold) = (best.feature, best.threshold);
            let left_leaf = Leaf::new(best.left.clone(), self.num_features, depth);
            let right_leaf = Leaf::new(best.right.clone(), self.num_features, depth);
            self.nodes.push(Node::Leaf(left_leaf));
            self.nodes.push(Node::Leaf(right_leaf));
            self.nodes[idx] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        Ok(())
    }
}

impl IncrementalClassifier for HoeffdingTree {
    fn learn_weighted(&mut self, ex: &LabeledExample, weight: f64) -> Result<()> {
        if ex.x.len() != self.num_features {
            return Err(Error::DimensionMismatch {
                expected: self.num_features,
                found: ex.x.len(),
            });
        }
        let class = ex.y.index();
        if class >= self.num_classes {
            return Err(Error::LabelOutOfRange {
                label: class,
                num_classes: self.num_classes,
            });
        }
        let idx = self.leaf_index(&ex.x);
        let Node::Leaf(leaf) = &mut self.nodes[idx] else {
            unreachable!("leaf_index always stops on a leaf");
        };
        for (obs, &v) in leaf.observers.iter_mut().zip(ex.x.iter()) {
            obs.observe(class, v, weight)?;
        }
        leaf.class_counts[class] += weight;
        let seen = leaf.total();
        let due = seen - leaf.weight_at_last_attempt >= self.config.grace_period as f64;
        if due && leaf.depth < self.config.max_depth && !leaf.is_pure() {
            leaf.weight_at_last_attempt = seen;
            self.attempt_split(idx)?;
        }
        Ok(())
    }

    fn predict_proba(&self, x: &[f64]) -> ClassDistribution {
        let leaf = self.leaf_for(x);
        let smoothed: Vec<f64> = leaf.class_counts.iter().map(|c| c + 1.0).collect();
        ClassDistribution::normalize(&smoothed).expect("smoothed counts are positive")
    }

    fn fresh(&self) -> Self {
        HoeffdingTree::new(self.num_features, self.num_classes, self.config)
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ClassLabel, FeatureVector};
    use rand::Rng;

    fn ex(x: &[f64], y: usize) -> LabeledExample {
        LabeledExample::new(FeatureVector::new(x.to_vec()).unwrap(), ClassLabel(y), 0)
    }

    fn step_sample(n: usize) -> Vec<(f64, usize)> {
        let mut rng = crate::seeding::rng_from(11);
        (0..n)
            .map(|_| {
                let x: f64 = rng.gen_range(0.0..10.0);
                (x, usize::from(x > 5.0))
            })
            .collect()
    }

    /// Exhaustive search over midpoints of the sorted sample.
    fn brute_force_threshold(sample: &[(f64, usize)]) -> f64 {
        let mut sorted = sample.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut total = [0.0; 2];
        for &(_, y) in &sorted {
            total[y] += 1.0;
        }
        let mut left = [0.0; 2];
        let mut best = (f64::NEG_INFINITY, 0.0);
        for w in sorted.windows(2) {
            left[w[0].1] += 1.0;
            let right = [total[0] - left[0], total[1] - left[1]];
            let gain = info_gain(&total, &left, &right);
            if gain > best.0 {
                best = (gain, 0.5 * (w[0].0 + w[1].0));
            }
        }
        best.1
    }

    #[test]
    fn bound_values() {
        let e200 = hoeffding_bound(1.0, 1e-7, 200.0).unwrap();
        let e50 = hoeffding_bound(1.0, 1e-7, 50.0).unwrap();
        assert!((e200 - 0.20074).abs() < 1e-5);
        assert!((e50 - 0.40148).abs() < 1e-5);
        assert!((e50 / e200 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bound_rejects_bad_parameters() {
        assert!(hoeffding_bound(1.0, 1.0, 10.0).is_err());
        assert!(hoeffding_bound(0.0, 0.1, 10.0).is_err());
        assert!(hoeffding_bound(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn learns_step_function() {
        let sample = step_sample(2000);
        let oracle = brute_force_threshold(&sample);
        let mut tree = HoeffdingTree::new(1, 2, HoeffdingTreeConfig::default());
        for &(x, y) in &sample {
            tree.learn(&ex(&[x], y)).unwrap();
        }
        let Node::Split { threshold, .. } = tree.root() else {
            panic!("root never split");
        };
        assert!((threshold - oracle).abs() <= 0.5, "{threshold} vs {oracle}");
        assert!(tree.predict_proba(&[10.0]).probs()[1] > 0.9);
    }

    #[test]
    fn no_split_before_grace_period() {
        let mut tree = HoeffdingTree::new(1, 2, HoeffdingTreeConfig::default());
        for &(x, y) in step_sample(199).iter() {
            tree.learn(&ex(&[x], y)).unwrap();
        }
        assert_eq!(tree.num_leaves(), 1);
        let counts = tree.leaf_for(&[0.0]).class_counts().to_vec();
        let total: f64 = counts.iter().sum();
        let d = tree.predict_proba(&[3.0]);
        assert!((d.probs()[0] - (counts[0] + 1.0) / (total + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn pure_stream_never_splits() {
        let mut tree = HoeffdingTree::new(2, 2, HoeffdingTreeConfig::default());
        let mut rng = crate::seeding::rng_from(3);
        for _ in 0..10_000 {
            tree.learn(&ex(&[rng.gen(), rng.gen()], 1)).unwrap();
        }
        assert_eq!(tree.num_leaves(), 1);
    }

    #[test]
    fn laplace_smoothing() {
        let mut tree = HoeffdingTree::new(1, 2, HoeffdingTreeConfig::default());
        assert_eq!(tree.predict_proba(&[0.0]).probs(), &[0.5, 0.5]);
        for i in 0..10 {
            tree.learn(&ex(&[i as f64], usize::from(i == 9))).unwrap();
        }
        let d = tree.predict_proba(&[0.0]);
        assert!((d.probs()[0] - 10.0 / 12.0).abs() < 1e-12);
        assert!((d.probs()[1] - 2.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_grace_period_is_majority_learner() {
        let cfg = HoeffdingTreeConfig {
            grace_period: u64::MAX,
            ..Default::default()
        };
        let mut tree = HoeffdingTree::new(1, 2, cfg);
        let sample = step_sample(5000);
        for &(x, y) in &sample {
            tree.learn(&ex(&[x], y)).unwrap();
        }
        assert_eq!(tree.num_leaves(), 1);
        let ones = sample.iter().filter(|s| s.1 == 1).count();
        let majority = usize::from(2 * ones > sample.len());
        for q in [0.0, 5.0, 10.0] {
            assert_eq!(tree.predict_proba(&[q]).argmax(), ClassLabel(majority));
        }
    }

    #[test]
    fn depth_is_capped() {
        let cfg = HoeffdingTreeConfig {
            max_depth: 2,
            grace_period: 50,
            ..Default::default()
        };
        let mut tree = HoeffdingTree::new(1, 2, cfg);
        let mut rng = crate::seeding::rng_from(5);
        for _ in 0..20_000 {
            let x: f64 = rng.gen_range(0.0..10.0);
            // alternating stripes need many splits
            tree.learn(&ex(&[x], (x as usize) % 2)).unwrap();
        }
        assert!(tree.depth() <= 2);
    }

    #[test]
    fn rejects_wrong_dimension() {
        let mut tree = HoeffdingTree::new(2, 2, HoeffdingTreeConfig::default());
        assert!(tree.learn(&ex(&[1.0], 0)).is_err());
    }
}
