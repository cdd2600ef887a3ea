use super::{EpsBall, Perturbation};
use crate::classifiers::{CapErrorSet, Classifier, LinearSeparator, OneNNClassifier, Trained};
use crate::error::{Error, Result};
use crate::geometry::{axpy, UnitVector};
use crate::label::Label;
use crate::rng::RngStream;
use crate::tasks::{GroundTruth, Task};
use std::sync::Arc;

/// Full knowledge of a classifier, enough to compute exact best responses.
///
/// A point counts when it can be moved to a label different from its
/// ground truth. For cap error sets only the components on the point's own
/// side of the decision radius count: moving across the radius is not an
/// error-set hit, and at the cap thresholds used here it would otherwise be
/// within reach of every point.
#[derive(Clone)]
pub enum Whitebox {
    Caps(Arc<CapErrorSet>),
    OneNn(Arc<OneNNClassifier>),
    Linear(LinearSeparator),
    /// Any classifier, searched along a fixed set of random directions with
    /// bisection. Only ever under-estimates reachability.
    Generic {
        classifier: Arc<dyn Classifier>,
        directions: Arc<Vec<UnitVector>>,
    },
}

/// Interior margin for moves into cap components.
const INTERIOR: f64 = 1e-9;

impl Whitebox {
    pub fn from_trained(t: &Trained) -> Self {
        match t {
            Trained::OneNn { classifier, .. } => Whitebox::OneNn(Arc::new(classifier.clone())),
            Trained::Linear { separator, .. } => Whitebox::Linear(separator.clone()),
            Trained::Implanted { classifier, .. } => {
                Whitebox::Caps(Arc::new(classifier.error.clone()))
            }
        }
    }

    pub fn generic(
        classifier: Arc<dyn Classifier>,
        d: usize,
        directions: usize,
        rng: &mut RngStream,
    ) -> Self {
        let dirs = (0..directions)
            .map(|_| UnitVector::random(d, rng))
            .collect();
        Whitebox::Generic {
            classifier,
            directions: Arc::new(dirs),
        }
    }

    /// Whether reachability is computed exactly.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Whitebox::Generic { .. })
    }

    /// Whether some point within `eps` of `x` is adversarial.
    pub fn reachable(&self, x: &[f64], truth: &GroundTruth, eps: EpsBall) -> Result<bool> {
        let r = eps.radius_at(x);
        Ok(match self {
            Whitebox::Caps(e) => {
                let h = truth.label(x);
                e.components
                    .iter()
                    .filter(|c| c.sign == h)
                    .any(|c| c.shape.distance(x) <= r)
            }
            Whitebox::OneNn(c) => c.reach(x, truth.label(x), r)?.is_some(),
            Whitebox::Linear(l) => {
                let s = l.signed_distance(x);
                match truth.label(x) {
                    Label::Neg => s >= -r,
                    Label::Pos => s < r,
                }
            }
            Whitebox::Generic { .. } => self.best_move(x, truth, eps)?.is_some(),
        })
    }

    /// An adversarial point within `eps` of `x`, if one is found.
    pub fn best_move(
        &self,
        x: &[f64],
        truth: &GroundTruth,
        eps: EpsBall,
    ) -> Result<Option<Vec<f64>>> {
        let r = eps.radius_at(x);
        let h = truth.label(x);
        Ok(match self {
            Whitebox::Caps(e) => {
                let own = || e.components.iter().filter(|c| c.sign == h);
                if own().any(|c| c.contains(x)) {
                    return Ok(Some(x.to_vec()));
                }
                own()
                    .filter_map(|c| c.shape.shrunk(INTERIOR).nearest_point(x))
                    .filter(|(d, _)| *d <= r)
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, p)| p)
            }
            Whitebox::OneNn(c) => c.reach(x, h, r)?.map(|reach| reach.target),
            Whitebox::Linear(l) => {
                if l.classify(x) != h {
                    return Ok(Some(x.to_vec()));
                }
                let s = l.signed_distance(x);
                if s.abs() > r || (h == Label::Pos && s >= r) {
                    return Ok(None);
                }
                let mut y = x.to_vec();
                let dir = if s >= 0.0 { -r } else { r };
                axpy(dir, l.normal(), &mut y);
                Some(y)
            }
            Whitebox::Generic {
                classifier,
                directions,
            } => {
                if classifier.classify(x) != h {
                    return Ok(Some(x.to_vec()));
                }
                let mut found = None;
                for u in directions.iter() {
                    let at = |t: f64| {
                        let mut y = x.to_vec();
                        axpy(t, u.as_slice(), &mut y);
                        y
                    };
                    if classifier.classify(&at(r)) == h {
                        continue;
                    }
                    let (mut lo, mut hi) = (0.0, r);
                    for _ in 0..40 {
                        let mid = 0.5 * (lo + hi);
                        if classifier.classify(&at(mid)) == h {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    found = Some(at(hi));
                    break;
                }
                found
            }
        })
    }
}

/// The perturbation moving every point to its best response (identity where
/// nothing is reachable).
pub fn whitebox_best_response(wb: &Whitebox, task: &Task, eps: EpsBall) -> Result<Perturbation> {
    match (wb, task) {
        (Whitebox::Caps(_), Task::TwoIntervals(_)) => {
            return Err(Error::Unsupported(
                "cap error sets live on the spheres task".into(),
            ));
        }
        (Whitebox::OneNn(c), _) if c.dim() != task.dim() => {
            return Err(Error::Unsupported(
                "classifier and task dimensions differ".into(),
            ));
        }
        (Whitebox::Linear(l), _) if l.normal().len() != task.dim() => {
            return Err(Error::Unsupported(
                "classifier and task dimensions differ".into(),
            ));
        }
        _ => {}
    }
    let wb = wb.clone();
    let truth = task.ground_truth();
    Ok(Perturbation::from_fn(eps, move |x| {
        wb.best_move(x, &truth, eps)
            .ok()
            .flatten()
            .unwrap_or_else(|| x.to_vec())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{sample_cap_error, CapVariant};
    use crate::geometry::{cap_threshold, CapModel};
    use crate::tasks::ConcentricSpheresTask;

    #[test]
    fn cap_best_response_lands_in_the_set() {
        let d = 30;
        let mut rng = RngStream::new(81, 0);
        let e =
            sample_cap_error(d, 0.01, 1, CapVariant::Iid, None, CapModel::Exact, &mut rng).unwrap();
        let eps = EpsBall::norm_scaled(cap_threshold(0.01, d).unwrap());
        let wb = Whitebox::Caps(Arc::new(e.clone()));
        let task = Task::ConcentricSpheres(ConcentricSpheresTask::new(d).unwrap());
        let p = whitebox_best_response(&wb, &task, eps).unwrap();
        let truth = task.ground_truth();
        use crate::classifiers::ErrorSet;
        for _ in 0..2000 {
            let x = task.sample_point(&mut rng);
            let y = p.apply_deterministic(&x).unwrap();
            assert!(p.certifies(&x));
            assert_eq!(e.contains(&y), wb.reachable(&x, &truth, eps).unwrap());
        }
    }

    #[test]
    fn linear_best_response_crosses() {
        let l = LinearSeparator::new(vec![0.0, 1.0], -1.0).unwrap();
        let wb = Whitebox::Linear(l.clone());
        let truth = GroundTruth::Midline { z: 2.0 };
        let eps = EpsBall::uniform(0.2);
        assert!(wb.reachable(&[0.0, 0.85], &truth, eps).unwrap());
        assert!(!wb.reachable(&[0.0, 0.7], &truth, eps).unwrap());
        let y = wb.best_move(&[0.0, 0.85], &truth, eps).unwrap().unwrap();
        assert_eq!(l.classify(&y), Label::Pos);
    }
}
