//! Learners, fixed classifiers, error sets and the query-counted oracle.

mod caps;
mod ellipsoid;
mod knn;
mod learner;
mod linear;
mod oracle;

pub use caps::{
    implant_classifier, sample_cap_error, CapComponent, CapErrorSet, CapVariant, DirectionSampler,
    EmptySet, ErrorSet, FullSet, IidDirections, ImplantedErrorClassifier, PointMassDirections,
    PredicateSet, OUTER_CAP_RADIUS,
};
pub use ellipsoid::EllipsoidClassifier;
pub use knn::{knn_classify, OneNNClassifier, Reach};
pub use learner::{LearnerSpec, Trained};
pub use linear::{train_linear_erm, LinearSeparator};
pub use oracle::{CountedOracle, LabelOracle, QueryRecord};

use crate::label::Label;

/// A deterministic label rule on `R^d`.
pub trait Classifier: Send + Sync {
    fn classify(&self, x: &[f64]) -> Label;
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn classify(&self, x: &[f64]) -> Label {
        (**self).classify(x)
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn classify(&self, x: &[f64]) -> Label {
        (**self).classify(x)
    }
}

impl<C: Classifier + ?Sized> Classifier for std::sync::Arc<C> {
    fn classify(&self, x: &[f64]) -> Label {
        (**self).classify(x)
    }
}

impl Classifier for crate::tasks::GroundTruth {
    fn classify(&self, x: &[f64]) -> Label {
        self.label(x)
    }
}

/// A classifier given by a closure.
pub struct FnClassifier<F>(pub F);

impl<F> Classifier for FnClassifier<F>
where
    F: Fn(&[f64]) -> Label + Send + Sync,
{
    fn classify(&self, x: &[f64]) -> Label {
        (self.0)(x)
    }
}
