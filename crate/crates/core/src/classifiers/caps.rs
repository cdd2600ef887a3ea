use super::Classifier;
use crate::error::{domain, Error, Result};
use crate::geometry::{
    cap_threshold_with, sample_haar_rotation, CapMinusBall, CapModel, Point, UnitVector,
};
use crate::label::Label;
use crate::rng::RngStream;
use crate::tasks::{GroundTruth, DECISION_RADIUS, OUTER_RADIUS};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Outer radius of an error component living on the outer sphere.
pub const OUTER_CAP_RADIUS: f64 = DECISION_RADIUS * OUTER_RADIUS;

/// A set with decidable membership.
pub trait ErrorSet: Send + Sync {
    fn contains(&self, x: &[f64]) -> bool;
}

impl<E: ErrorSet + ?Sized> ErrorSet for &E {
    fn contains(&self, x: &[f64]) -> bool {
        (**self).contains(x)
    }
}

impl<E: ErrorSet + ?Sized> ErrorSet for Box<E> {
    fn contains(&self, x: &[f64]) -> bool {
        (**self).contains(x)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EmptySet;

impl ErrorSet for EmptySet {
    fn contains(&self, _: &[f64]) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FullSet;

impl ErrorSet for FullSet {
    fn contains(&self, _: &[f64]) -> bool {
        true
    }
}

pub struct PredicateSet<F>(pub F);

impl<F> ErrorSet for PredicateSet<F>
where
    F: Fn(&[f64]) -> bool + Send + Sync,
{
    fn contains(&self, x: &[f64]) -> bool {
        (self.0)(x)
    }
}

/// One cap-minus-ball component. `sign = Neg` puts it across the unit
/// sphere (`cap(y, 1.15, tau) \ B_{1.15/1.3}`), `sign = Pos` across the
/// outer sphere (`cap(y, 1.495, 1.3 tau) \ B_{1.15}`).
#[derive(Clone, Debug, PartialEq)]
pub struct CapComponent {
    pub sign: Label,
    pub shape: CapMinusBall,
}

impl CapComponent {
    pub fn new(axis: UnitVector, sign: Label, tau: f64) -> Self {
        let inner = CapMinusBall {
            axis,
            outer_radius: DECISION_RADIUS,
            threshold: tau,
            inner_radius: DECISION_RADIUS / OUTER_RADIUS,
        };
        let shape = match sign {
            Label::Neg => inner,
            Label::Pos => inner.scaled(OUTER_RADIUS),
        };
        Self { sign, shape }
    }

    pub fn axis(&self) -> &UnitVector {
        &self.shape.axis
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.shape.contains(x)
    }
}

/// Union of cap-minus-ball components, each built from `tau(delta / k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapErrorSet {
    pub components: Vec<CapComponent>,
    pub delta: f64,
    pub k: usize,
    pub tau: f64,
}

impl CapErrorSet {
    pub fn new(components: Vec<CapComponent>, delta: f64, k: usize, tau: f64) -> Self {
        Self {
            components,
            delta,
            k,
            tau,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.axis().dim())
    }

    /// Distance from `x` to the closest component, with its index and a
    /// closest point. `None` for an empty union.
    pub fn nearest_point(&self, x: &[f64]) -> Option<(f64, Point, usize)> {
        self.components
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.shape.nearest_point(x).map(|(d, p)| (d, p, i)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| c.shape.distance(x))
            .fold(f64::INFINITY, f64::min)
    }
}

impl ErrorSet for CapErrorSet {
    fn contains(&self, x: &[f64]) -> bool {
        self.components.iter().any(|c| c.contains(x))
    }
}

/// How component axes are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapVariant {
    /// Axes i.i.d. uniform on the sphere.
    Iid,
    /// Axes `M y_1, ..., M y_k` with `(y_i)` from a direction sampler and
    /// `M` Haar.
    FromG,
}

/// A distribution over `k`-tuples of unit vectors.
pub trait DirectionSampler: Send + Sync {
    fn sample(&self, d: usize, k: usize, rng: &mut RngStream) -> Result<Vec<UnitVector>>;
}

/// `k` i.i.d. uniform directions.
#[derive(Clone, Copy, Debug, Default)]
pub struct IidDirections;

impl DirectionSampler for IidDirections {
    fn sample(&self, d: usize, k: usize, rng: &mut RngStream) -> Result<Vec<UnitVector>> {
        Ok((0..k).map(|_| UnitVector::random(d, rng)).collect())
    }
}

/// Always returns the same tuple.
#[derive(Clone, Debug)]
pub struct PointMassDirections(pub Vec<UnitVector>);

impl DirectionSampler for PointMassDirections {
    fn sample(&self, d: usize, k: usize, _: &mut RngStream) -> Result<Vec<UnitVector>> {
        if self.0.len() != k {
            return domain(format!(
                "direction tuple has {} entries, expected {k}",
                self.0.len()
            ));
        }
        if self.0.iter().any(|u| u.dim() != d) {
            return domain(format!("direction tuple must live in dimension {d}"));
        }
        Ok(self.0.clone())
    }
}

fn random_sign(rng: &mut RngStream) -> Label {
    if rng.random::<bool>() {
        Label::Pos
    } else {
        Label::Neg
    }
}

/// Draws an error set from `Cap(delta)` (`k = 1`), `Caps_k^iid(delta)` or
/// `Caps_k^G(delta)`.
pub fn sample_cap_error(
    d: usize,
    delta: f64,
    k: usize,
    variant: CapVariant,
    g: Option<&dyn DirectionSampler>,
    model: CapModel,
    rng: &mut RngStream,
) -> Result<CapErrorSet> {
    if k == 0 {
        return domain("number of components must be at least 1");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("cap fraction must lie in (0, 1), got {delta}"));
    }
    let tau = cap_threshold_with(delta / k as f64, d, model)?;
    let signs: Vec<Label> = (0..k).map(|_| random_sign(rng)).collect();
    let axes: Vec<UnitVector> = match variant {
        CapVariant::Iid => IidDirections.sample(d, k, rng)?,
        CapVariant::FromG => {
            let g =
                g.ok_or_else(|| Error::Domain("from_G variant needs a direction sampler".into()))?;
            let ys = g.sample(d, k, rng)?;
            if ys.len() != k {
                return domain(format!(
                    "direction sampler returned {} vectors, expected {k}",
                    ys.len()
                ));
            }
            let m = sample_haar_rotation(d, rng);
            ys.iter()
                .map(|y| {
                    UnitVector::new(m.apply(y.as_slice()))
                        .ok_or_else(|| Error::Numerical("rotated axis is degenerate".into()))
                })
                .collect::<Result<_>>()?
        }
    };
    let components = axes
        .into_iter()
        .zip(signs)
        .map(|(a, s)| CapComponent::new(a, s, tau))
        .collect();
    Ok(CapErrorSet::new(components, delta, k, tau))
}

/// `h` with its labels flipped exactly on `error`.
#[derive(Clone, Debug)]
pub struct ImplantedErrorClassifier<E> {
    pub truth: GroundTruth,
    pub error: E,
}

impl<E: ErrorSet> Classifier for ImplantedErrorClassifier<E> {
    fn classify(&self, x: &[f64]) -> Label {
        let l = self.truth.label(x);
        if self.error.contains(x) {
            l.flip()
        } else {
            l
        }
    }
}

pub fn implant_classifier<E: ErrorSet>(
    truth: GroundTruth,
    error: E,
) -> ImplantedErrorClassifier<E> {
    ImplantedErrorClassifier { truth, error }
}
