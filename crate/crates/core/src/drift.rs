//! DDM: drift detection from the running error rate of a classifier.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DriftLevel {
    Stable,
    Warning,
    Drift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DdmConfig {
    /// Examples seen before any level is reported.
    pub min_instances: u64,
    pub warning_level: f64,
    pub drift_level: f64,
}

impl Default for DdmConfig {
    fn default() -> Self {
        DdmConfig {
            min_instances: 30,
            warning_level: 2.0,
            drift_level: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ddm {
    config: DdmConfig,
    n: u64,
    p: f64,
    s: f64,
    p_min: f64,
    s_min: f64,
}

impl Default for Ddm {
    fn default() -> Self {
        Ddm::new(DdmConfig::default())
    }
}

impl Ddm {
    pub fn new(config: DdmConfig) -> Self {
        Ddm {
            config,
            n: 0,
            p: 0.0,
            s: 0.0,
            p_min: f64::INFINITY,
            s_min: f64::INFINITY,
        }
    }

    pub fn config(&self) -> &DdmConfig {
        &self.config
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn error_rate(&self) -> f64 {
        self.p
    }

    pub fn std_dev(&self) -> f64 {
        self.s
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    /// Warning and drift boundaries on p + s for the current minimum.
    pub fn boundaries(&self) -> (f64, f64) {
        boundaries(self.p_min, self.s_min, &self.config)
    }

    /// Feeds one error indicator. On `Drift` the caller is expected to [`reset`](Self::reset).
    pub fn update(&mut self, error: bool) -> DriftLevel {
        self.n += 1;
        let n = self.n as f64;
        self.p += (f64::from(u8::from(error)) - self.p) / n;
        self.s = (self.p * (1.0 - self.p) / n).sqrt();
        if self.n < self.config.min_instances {
            return DriftLevel::Stable;
        }
        if self.p + self.s <= self.p_min + self.s_min {
            self.p_min = self.p;
            self.s_min = self.s;
        }
        let (warning, drift) = self.boundaries();
        let level = self.p + self.s;
        if level >= drift && level > self.p_min + self.s_min {
            DriftLevel::Drift
        } else if level >= warning && level > self.p_min + self.s_min {
            DriftLevel::Warning
        } else {
            DriftLevel::Stable
        }
    }

    pub fn reset(&mut self) {
        *self = Ddm::new(self.config);
    }
}

pub fn boundaries(p_min: f64, s_min: f64, config: &DdmConfig) -> (f64, f64) {
    (
        p_min + config.warning_level * s_min,
        p_min + config.drift_level * s_min,
    )
}
