use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

use crate::error::{Error, Result};

/// Two-tailed Nemenyi critical values q_0.05 for k = 2..=12 (Demšar, 2006).
pub const NEMENYI_Q_05: [(usize, f64); 11] = [
    (2, 1.960),
    (3, 2.343),
    (4, 2.569),
    (5, 2.728),
    (6, 2.850),
    (7, 2.949),
    (8, 3.031),
    (9, 3.102),
    (10, 3.164),
    (11, 3.219),
    (12, 3.268),
];

/// Ranks with 1 = largest value; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub chi2: f64,
    pub mean_ranks: Vec<f64>,
    pub approaches: usize,
    pub observations: usize,
    /// χ² quantile at 0.95 with k − 1 degrees of freedom.
    pub critical: f64,
    pub significant: bool,
}

pub fn chi_square_critical(dof: usize, level: f64) -> Result<f64> {
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(dist.inverse_cdf(level))
}

/// Friedman statistic over `values[approach][observation]`, higher values ranked first.
pub fn friedman_test(values: &[Vec<f64>]) -> Result<FriedmanResult> {
    let k = values.len();
    if k < 2 {
        return Err(Error::InvalidParameter("Friedman test needs at least two approaches".into()));
    }
    let n = values[0].len();
    if n == 0 || values.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidParameter(
            "Friedman test needs equally many (and at least one) observations per approach".into(),
        ));
    }
    let mut sums = vec![0.0; k];
    let mut column = vec![0.0; k];
    for i in 0..n {
        for (c, v) in column.iter_mut().zip(values) {
            *c = v[i];
        }
        for (s, r) in sums.iter_mut().zip(average_ranks(&column)) {
            *s += r;
        }
    }
    let (kf, nf) = (k as f64, n as f64);
    let mean_ranks: Vec<f64> = sums.iter().map(|s| s / nf).collect();
    let sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let chi2 = 12.0 * nf / (kf * (kf + 1.0)) * (sq - kf * (kf + 1.0).powi(2) / 4.0);
    let critical = chi_square_critical(k - 1, 0.95)?;
    Ok(FriedmanResult {
        chi2,
        mean_ranks,
        approaches: k,
        observations: n,
        critical,
        significant: chi2 > critical,
    })
}

/// Nemenyi critical difference q_0.05 · sqrt(k(k+1) / 6N).
pub fn nemenyi_cd(k: usize, n: usize) -> Result<f64> {
    let q = NEMENYI_Q_05
        .iter()
        .find(|(kk, _)| *kk == k)
        .map(|(_, q)| *q)
        .ok_or_else(|| Error::InvalidParameter(format!("no Nemenyi critical value for k = {k}")))?;
    if n == 0 {
        return Err(Error::InvalidParameter("Nemenyi CD needs N ≥ 1".into()));
    }
    let (kf, nf) = (k as f64, n as f64);
    Ok(q * (kf * (kf + 1.0) / (6.0 * nf)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// One-sided exact P(X ≥ wins) for X ~ Bin(wins + losses, 1/2); ties are dropped.
    pub p_value: f64,
}

/// Tests whether `a` tends to exceed `b` in paired observations.
pub fn sign_test(a: &[f64], b: &[f64]) -> Result<SignTest> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let ties = a.len() - wins - losses;
    let trials = wins + losses;
    let p_value = if trials == 0 || wins == 0 {
        1.0
    } else {
        let bin = Binomial::new(0.5, trials as u64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        (1.0 - bin.cdf(wins as u64 - 1)).clamp(0.0, 1.0)
    };
    Ok(SignTest {
        wins,
        losses,
        ties,
        p_value,
    })
}
