use crate::error::{domain, Result};
use crate::geometry::{distance, norm, Point};
use crate::rng::RngStream;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// The perturbation radius allowed at a point: `eps`, or `eps * |x|` when
/// the ball scales with the sphere carrying `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsBall {
    pub eps: f64,
    #[serde(default)]
    pub scale_with_norm: bool,
}

impl EpsBall {
    pub fn uniform(eps: f64) -> Self {
        Self {
            eps,
            scale_with_norm: false,
        }
    }

    pub fn norm_scaled(eps: f64) -> Self {
        Self {
            eps,
            scale_with_norm: true,
        }
    }

    pub fn radius_at(&self, x: &[f64]) -> f64 {
        if self.scale_with_norm {
            self.eps * norm(x)
        } else {
            self.eps
        }
    }
}

type MapFn = dyn Fn(&[f64]) -> Point + Send + Sync;

#[derive(Clone)]
enum Kind {
    Identity,
    Map(Arc<MapFn>),
    Mixture(Vec<Perturbation>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    Deterministic,
    Mixture,
}

/// How the pulled-back mass of a mixture is counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassAccounting {
    /// Each sample draws one component uniformly at random.
    #[default]
    Sampled,
    /// Each sample averages the indicator over all components.
    Averaged,
}

/// A transport map `p` with a declared radius bound, or a uniform mixture of
/// such maps.
#[derive(Clone)]
pub struct Perturbation {
    bound: EpsBall,
    kind: Kind,
}

impl Perturbation {
    pub fn identity(bound: EpsBall) -> Self {
        Self {
            bound,
            kind: Kind::Identity,
        }
    }

    pub fn from_fn<F>(bound: EpsBall, f: F) -> Self
    where
        F: Fn(&[f64]) -> Point + Send + Sync + 'static,
    {
        Self {
            bound,
            kind: Kind::Map(Arc::new(f)),
        }
    }

    /// Uniform mixture; nested mixtures are flattened.
    pub fn mixture(bound: EpsBall, components: Vec<Perturbation>) -> Result<Self> {
        if components.is_empty() {
            return domain("a mixture needs at least one component");
        }
        let mut flat = Vec::with_capacity(components.len());
        for c in components {
            match c.kind {
                Kind::Mixture(inner) => flat.extend(inner),
                _ => flat.push(c),
            }
        }
        Ok(Self {
            bound,
            kind: Kind::Mixture(flat),
        })
    }

    pub fn bound(&self) -> EpsBall {
        self.bound
    }

    pub fn kind(&self) -> PerturbationKind {
        match self.kind {
            Kind::Mixture(_) => PerturbationKind::Mixture,
            _ => PerturbationKind::Deterministic,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, Kind::Identity)
    }

    /// The mixture components, or the map itself.
    pub fn components(&self) -> Vec<&Perturbation> {
        match &self.kind {
            Kind::Mixture(c) => c.iter().collect(),
            _ => vec![self],
        }
    }

    /// `p(x)` for a deterministic map; `None` for a mixture.
    pub fn apply_deterministic(&self, x: &[f64]) -> Option<Point> {
        match &self.kind {
            Kind::Identity => Some(x.to_vec()),
            Kind::Map(f) => Some(f(x)),
            Kind::Mixture(_) => None,
        }
    }

    /// `p(x)`; a mixture applies one component chosen uniformly with `rng`.
    pub fn apply(&self, x: &[f64], rng: &mut RngStream) -> Point {
        match &self.kind {
            Kind::Mixture(c) => {
                let i = rng.random_range(0..c.len());
                c[i].apply(x, rng)
            }
            _ => self.apply_deterministic(x).expect("deterministic"),
        }
    }

    /// Whether every component moves `x` by at most the declared radius
    /// (with a `1e-9` slack).
    pub fn certifies(&self, x: &[f64]) -> bool {
        let r = self.bound.radius_at(x) + 1e-9;
        self.components().iter().all(|c| {
            let y = c.apply_deterministic(x).expect("flattened");
            y.iter().all(|v| v.is_finite()) && distance(&y, x) <= r
        })
    }
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Identity => "identity".to_string(),
            Kind::Map(_) => "map".to_string(),
            Kind::Mixture(c) => format!("mixture of {}", c.len()),
        };
        f.debug_struct("Perturbation")
            .field("bound", &self.bound)
            .field("kind", &kind)
            .finish()
    }
}
