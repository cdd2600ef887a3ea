use super::Classifier;
use crate::error::{domain, Error, Result};
use crate::geometry::{dot, gaussian_vector, norm};
use crate::label::Label;
use crate::rng::RngStream;
use crate::tasks::Dataset;
use rand::seq::SliceRandom;

/// `sign(<w, x> + b)` with `|w| = 1`; the boundary itself is labeled +1.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSeparator {
    w: Vec<f64>,
    b: f64,
}

impl LinearSeparator {
    /// Normalizes `(w, b)` so that `|w| = 1`.
    pub fn new(w: Vec<f64>, b: f64) -> Result<Self> {
        let n = norm(&w);
        if !(n.is_finite() && n > 0.0) || !b.is_finite() {
            return domain("separator needs a finite non-zero normal");
        }
        Ok(Self {
            w: w.iter().map(|c| c / n).collect(),
            b: b / n,
        })
    }

    pub fn normal(&self) -> &[f64] {
        &self.w
    }

    pub fn bias(&self) -> f64 {
        self.b
    }

    /// Signed Euclidean distance to the boundary (positive on the +1 side).
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    /// For a planar separator, the `y` at which the line crosses abscissa `x`.
    pub fn y_at(&self, x: f64) -> Option<f64> {
        if self.w.len() != 2 || self.w[1] == 0.0 {
            return None;
        }
        Some(-(self.w[0] * x + self.b) / self.w[1])
    }
}

impl Classifier for LinearSeparator {
    fn classify(&self, x: &[f64]) -> Label {
        Label::from_sign(self.signed_distance(x))
    }
}

const MARGIN: f64 = 0.05;
const MAX_EPOCHS: usize = 20_000;

/// Perceptron with random initialization and random presentation order.
///
/// Coordinates are rescaled to unit range before training and the update
/// fires on any point within a small fixed margin, so the result separates
/// the sample but is not the maximum-margin line.
pub fn train_linear_erm(s: &Dataset, rng: &mut RngStream) -> Result<LinearSeparator> {
    if s.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let d = s.task.dim();
    let mut scale = vec![0.0f64; d];
    for p in s.points() {
        for (sc, c) in scale.iter_mut().zip(p) {
            *sc = sc.max(c.abs());
        }
    }
    scale
        .iter_mut()
        .filter(|c| **c == 0.0)
        .for_each(|c| *c = 1.0);
    let data: Vec<(Vec<f64>, f64)> = s
        .samples
        .iter()
        .map(|p| {
            let mut u: Vec<f64> = p.point.iter().zip(&scale).map(|(c, sc)| c / sc).collect();
            u.push(1.0);
            (u, p.label.as_f64())
        })
        .collect();
    let mut w = gaussian_vector(d + 1, rng);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..MAX_EPOCHS {
        order.shuffle(rng);
        let mut updates = 0;
        for &i in &order {
            let (u, y) = &data[i];
            if y * dot(&w, u) <= MARGIN * norm(&w) {
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi += y * ui;
                }
                updates += 1;
            }
        }
        if updates == 0 {
            let weights: Vec<f64> = w[..d].iter().zip(&scale).map(|(wi, sc)| wi / sc).collect();
            let sep = LinearSeparator::new(weights, w[d])?;
            if s.samples.iter().all(|p| sep.classify(&p.point) == p.label) {
                return Ok(sep);
            }
        }
    }
    Err(Error::Training(format!(
        "perceptron did not separate the sample within {MAX_EPOCHS} epochs"
    )))
}
