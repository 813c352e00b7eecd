use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound applied wherever a Gaussian variance is consumed.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// One-pass mean/variance accumulator (Welford).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunningGaussian {
    /// Total frequency weight.
    n: f64,
    mean: f64,
    m2: f64,
}

impl RunningGaussian {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, v: f64) -> Result<()> {
        self.update_weighted(v, 1.0)
    }

    /// Absorbs `v` as if it were seen `weight` times (West's weighted recurrence).
    pub fn update_weighted(&mut self, v: f64, weight: f64) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::NonFinite(v));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::InvalidParameter(format!("weight {weight}")));
        }
        if weight == 0.0 {
            return Ok(());
        }
        self.n += weight;
        let delta = v - self.mean;
        self.mean += delta * weight / self.n;
        self.m2 += weight * delta * (v - self.mean);
        Ok(())
    }

    pub fn count(&self) -> f64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Sample variance, `None` below two observations.
    pub fn sample_variance(&self) -> Option<f64> {
        (self.n >= 2.0).then(|| self.m2 / (self.n - 1.0))
    }

    /// Sample variance clamped from below by [`VARIANCE_FLOOR`]; the floor itself when undefined.
    pub fn variance(&self) -> f64 {
        self.sample_variance()
            .map_or(VARIANCE_FLOOR, |v| v.max(VARIANCE_FLOOR))
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let var = self.variance();
        let d = x - self.mean;
        -0.5 * (2.0 * PI * var).ln() - d * d / (2.0 * var)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / (self.std_dev() * std::f64::consts::SQRT_2);
        0.5 * (1.0 + statrs::function::erf::erf(z))
    }
}
