//! Randomly shifted grid smoothing: every point takes the base label of the
//! centre of its grid cell.

use crate::classifiers::Classifier;
use crate::error::{domain, Result};
use crate::estimate::Estimate;
use crate::geometry::Point;
use crate::label::Label;
use crate::rng::RngStream;
use rand::Rng;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

/// A base classifier seen through a grid of side `side` shifted by a vector
/// in `[0, side)^d`. Cell labels are memoized.
pub struct SmoothedClassifier<C> {
    base: C,
    side: f64,
    shift: Vec<f64>,
    cache: RwLock<HashMap<Vec<i64>, Label>>,
    base_queries: AtomicU64,
}

impl<C: Classifier> SmoothedClassifier<C> {
    pub fn with_shift(base: C, side: f64, shift: Vec<f64>) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return domain(format!("cell side must be positive, got {side}"));
        }
        if shift.is_empty() || shift.iter().any(|s| !(0.0..side).contains(s)) {
            return domain("shift must be a non-empty vector in [0, side)^d");
        }
        Ok(Self {
            base,
            side,
            shift,
            cache: RwLock::new(HashMap::new()),
            base_queries: AtomicU64::new(0),
        })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn base(&self) -> &C {
        &self.base
    }

    pub fn cell_of(&self, x: &[f64]) -> Vec<i64> {
        cell_index(x, &self.shift, self.side)
    }

    pub fn cell_center(&self, cell: &[i64]) -> Point {
        cell_center(cell, &self.shift, self.side)
    }

    /// Number of base evaluations so far (one per distinct cell, up to races).
    pub fn base_queries(&self) -> u64 {
        self.base_queries.load(Ordering::Relaxed)
    }

    pub fn cached_cells(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }
}

fn cell_index(x: &[f64], shift: &[f64], side: f64) -> Vec<i64> {
    x.iter()
        .zip(shift)
        .map(|(c, s)| ((c - s) / side).floor() as i64)
        .collect()
}

fn cell_center(cell: &[i64], shift: &[f64], side: f64) -> Point {
    cell.iter()
        .zip(shift)
        .map(|(&k, s)| s + (k as f64 + 0.5) * side)
        .collect()
}

impl<C: Classifier> Classifier for SmoothedClassifier<C> {
    fn classify(&self, x: &[f64]) -> Label {
        let key = self.cell_of(x);
        if let Some(&l) = self.cache.read().expect("cache lock").get(&key) {
            return l;
        }
        let label = self.base.classify(&self.cell_center(&key));
        self.base_queries.fetch_add(1, Ordering::Relaxed);
        // a concurrent writer may have won; its answer is kept
        *self
            .cache
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert(label)
    }
}

fn random_shift(d: usize, side: f64, rng: &mut RngStream) -> Vec<f64> {
    (0..d).map(|_| rng.random::<f64>() * side).collect()
}

/// Wraps `base` with a freshly drawn shift.
pub fn defense_wrap<C: Classifier>(
    base: C,
    d: usize,
    side: f64,
    rng: &mut RngStream,
) -> Result<SmoothedClassifier<C>> {
    if d == 0 {
        return domain("dimension must be positive");
    }
    let shift = random_shift(d, side, rng);
    SmoothedClassifier::with_shift(base, side, shift)
}

/// Probability over shifts that `x` and `x2` receive different smoothed labels.
pub fn flip_probability<C: Classifier>(
    base: &C,
    side: f64,
    x: &[f64],
    x2: &[f64],
    n: usize,
    rng: &mut RngStream,
) -> Result<Estimate> {
    if n == 0 {
        return domain("at least one shift draw is required");
    }
    if !(side.is_finite() && side > 0.0) {
        return domain(format!("cell side must be positive, got {side}"));
    }
    let mut flips = 0u64;
    for _ in 0..n {
        let shift = random_shift(x.len(), side, rng);
        let a = cell_index(x, &shift, side);
        let b = cell_index(x2, &shift, side);
        if a != b
            && base.classify(&cell_center(&a, &shift, side))
                != base.classify(&cell_center(&b, &shift, side))
        {
            flips += 1;
        }
    }
    Ok(Estimate::from_counts(flips, n as u64))
}

/// Probability that a displacement `delta` along one axis changes the cell.
pub fn axis_crossing_probability(delta: f64, side: f64) -> f64 {
    (delta.abs() / side).min(1.0)
}

/// Union bound on the cell-change probability for a displacement `dx`.
pub fn crossing_union_bound(dx: &[f64], side: f64) -> f64 {
    dx.iter().map(|c| axis_crossing_probability(*c, side)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::FnClassifier;

    #[test]
    fn constant_base_stays_constant() {
        let f = FnClassifier(|_: &[f64]| Label::Pos);
        let mut rng = RngStream::new(91, 0);
        let g = defense_wrap(&f, 3, 0.5, &mut rng).unwrap();
        for i in 0..50 {
            assert_eq!(g.classify(&[i as f64 * 0.37, -1.0, 2.0]), Label::Pos);
        }
    }

    #[test]
    fn same_cell_same_label_and_cache() {
        let f = FnClassifier(|x: &[f64]| Label::from_sign(x[0] - 0.1));
        let g = SmoothedClassifier::with_shift(&f, 1.0, vec![0.25, 0.5]).unwrap();
        assert_eq!(g.cell_of(&[0.3, 0.6]), g.cell_of(&[1.2, 1.4]));
        assert_eq!(g.classify(&[0.3, 0.6]), g.classify(&[1.2, 1.4]));
        assert_eq!(g.base_queries(), 1);
        assert_eq!(g.cached_cells(), 1);
    }

    #[test]
    fn identical_points_never_flip() {
        let f = FnClassifier(|x: &[f64]| Label::from_sign(x[0]));
        let e = flip_probability(
            &f,
            0.3,
            &[0.1, 0.2],
            &[0.1, 0.2],
            100,
            &mut RngStream::new(92, 0),
        )
        .unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn rejects_bad_side() {
        let f = FnClassifier(|_: &[f64]| Label::Pos);
        assert!(defense_wrap(&f, 2, 0.0, &mut RngStream::new(93, 0)).is_err());
    }
}
