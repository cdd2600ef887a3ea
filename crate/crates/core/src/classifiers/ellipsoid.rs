use super::Classifier;
use crate::error::{domain, Result};
use crate::geometry::RotationMatrix;
use crate::label::Label;

/// `-1` iff `sum_i alpha_i (M x)_i^2 <= 1`: an origin-centred ellipsoid.
#[derive(Clone, Debug)]
pub struct EllipsoidClassifier {
    rotation: RotationMatrix,
    weights: Vec<f64>,
}

impl EllipsoidClassifier {
    pub fn new(rotation: RotationMatrix, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != rotation.dim() {
            return domain("one weight per coordinate is required");
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return domain("ellipsoid weights must be positive");
        }
        Ok(Self { rotation, weights })
    }

    /// The ball `|x| <= r`.
    pub fn ball(d: usize, r: f64) -> Result<Self> {
        Self::new(RotationMatrix::identity(d), vec![1.0 / (r * r); d])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let z = self.rotation.apply(x);
        z.iter().zip(&self.weights).map(|(zi, a)| a * zi * zi).sum()
    }
}

impl Classifier for EllipsoidClassifier {
    fn classify(&self, x: &[f64]) -> Label {
        if self.quadratic_form(x) <= 1.0 {
            Label::Neg
        } else {
            Label::Pos
        }
    }
}
