use super::{run_adversary, Adversary, AdversaryReport, AttackOutput, EpsBall, Perturbation};
use crate::classifiers::{CountedOracle, LabelOracle};
use crate::error::{domain, Result};
use crate::geometry::{axpy, geodesic_push, sample_uniform_sphere, Point};
use crate::label::Label;
use crate::rng::RngStream;
use crate::tasks::{INNER_RADIUS, OUTER_RADIUS};

/// Pushes every point along its own sphere by the allowed chord towards
/// `v`; the identity when `v` is `None`.
pub fn cap_push(v: Option<Vec<f64>>, eps: EpsBall) -> Perturbation {
    match v {
        None => Perturbation::identity(eps),
        Some(v) => Perturbation::from_fn(eps, move |x| geodesic_push(x, &v, eps.radius_at(x))),
    }
}

/// `s` uniform points on the unit sphere and `s` on the outer sphere.
pub fn sample_query_sets(d: usize, s: usize, rng: &mut RngStream) -> (Vec<Point>, Vec<Point>) {
    let qm = (0..s)
        .map(|_| sample_uniform_sphere(d, INNER_RADIUS, rng))
        .collect();
    let qp = (0..s)
        .map(|_| sample_uniform_sphere(d, OUTER_RADIUS, rng))
        .collect();
    (qm, qp)
}

/// Queries both sets, averages the misclassified points and returns the
/// push towards that average.
fn attack_with_queries(
    oracle: &mut dyn LabelOracle,
    q_minus: &[Point],
    q_plus: &[Point],
    eps: EpsBall,
) -> Result<AttackOutput> {
    let d = q_minus.first().or(q_plus.first()).map_or(0, Vec::len);
    let mut sum = vec![0.0; d];
    let mut hits = 0usize;
    for (set, bad) in [(q_minus, Label::Pos), (q_plus, Label::Neg)] {
        for x in set {
            if oracle.query(x)? == bad {
                axpy(1.0, x, &mut sum);
                hits += 1;
            }
        }
    }
    let v = (hits > 0).then(|| sum.iter().map(|c| c / hits as f64).collect());
    Ok(AttackOutput::new(cap_push(v, eps)))
}

/// Non-adaptive attack with fresh uniform query sets of size `s` per sphere.
#[derive(Clone, Copy, Debug)]
pub struct CapAdversary {
    pub d: usize,
    pub s: usize,
    pub eps: EpsBall,
}

impl Adversary for CapAdversary {
    fn attack(&self, oracle: &mut dyn LabelOracle, rng: &mut RngStream) -> Result<AttackOutput> {
        if self.s == 0 {
            return domain("at least one query per sphere is required");
        }
        let (qm, qp) = sample_query_sets(self.d, self.s, rng);
        attack_with_queries(oracle, &qm, &qp, self.eps)
    }

    fn is_randomized(&self) -> bool {
        true
    }
}

/// The same attack on fixed query sets.
#[derive(Clone, Debug)]
pub struct DeterministicCapAdversary {
    pub q_minus: Vec<Point>,
    pub q_plus: Vec<Point>,
    pub eps: EpsBall,
}

impl Adversary for DeterministicCapAdversary {
    fn attack(&self, oracle: &mut dyn LabelOracle, _: &mut RngStream) -> Result<AttackOutput> {
        if self.q_minus.is_empty() || self.q_plus.is_empty() {
            return domain("query sets must be non-empty");
        }
        attack_with_queries(oracle, &self.q_minus, &self.q_plus, self.eps)
    }

    fn is_randomized(&self) -> bool {
        false
    }
}

pub fn cap_adversary_randomized(
    oracle: &mut CountedOracle<'_>,
    d: usize,
    s: usize,
    eps: EpsBall,
    rng: &mut RngStream,
) -> Result<AdversaryReport> {
    run_adversary(&CapAdversary { d, s, eps }, oracle, rng)
}

pub fn cap_adversary_deterministic(
    oracle: &mut CountedOracle<'_>,
    q_minus: Vec<Point>,
    q_plus: Vec<Point>,
    eps: EpsBall,
) -> Result<AdversaryReport> {
    let adv = DeterministicCapAdversary {
        q_minus,
        q_plus,
        eps,
    };
    // never drawn from
    let mut rng = RngStream::new(0, 0);
    run_adversary(&adv, oracle, &mut rng)
}
