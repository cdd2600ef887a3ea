//! Monte Carlo estimates with standard errors, and binomial intervals.

use serde::{Deserialize, Serialize};

/// A Monte Carlo estimate of a probability or mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    /// Set when the estimator can only under-count (e.g. random-direction
    /// search for adversarial examples).
    #[serde(default)]
    pub lower_bound_only: bool,
}

impl Estimate {
    /// Fraction `hits / n` with stderr `sqrt(p (1 - p) / n)`.
    pub fn from_counts(hits: u64, n: u64) -> Self {
        assert!(n > 0, "empty sample");
        let p = hits as f64 / n as f64;
        Self {
            value: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n,
            lower_bound_only: false,
        }
    }

    /// Sample mean with the usual `s / sqrt(n)` standard error.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n > 0, "empty sample");
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            value: mean,
            stderr: (var / n as f64).sqrt(),
            n: n as u64,
            lower_bound_only: false,
        }
    }

    /// A value known without sampling error.
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            n: 0,
            lower_bound_only: false,
        }
    }

    pub fn with_lower_bound_only(mut self, flag: bool) -> Self {
        self.lower_bound_only = flag;
        self
    }

    /// `value -/+ z * stderr`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.value - z * self.stderr, self.value + z * self.stderr)
    }

    /// Whether `target` lies within `z` standard errors (plus `slack`).
    pub fn covers(&self, target: f64, z: f64, slack: f64) -> bool {
        (self.value - target).abs() <= z * self.stderr + slack
    }
}

/// Wilson score interval for `hits` successes out of `n` trials.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_stderr() {
        let e = Estimate::from_counts(25, 100);
        assert_eq!(e.value, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn values_mean() {
        let e = Estimate::from_values(&[1.0, 2.0, 3.0]);
        assert_eq!(e.value, 2.0);
        assert!((e.stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wilson_contains_point_estimate() {
        for (h, n) in [(0, 10), (5, 10), (10, 10), (37, 200)] {
            let (lo, hi) = wilson_interval(h, n, 1.96);
            let p = h as f64 / n as f64;
            assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }
}
