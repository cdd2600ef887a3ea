use super::estimators::{estimate_ar_opt, estimate_trained_ar};
use crate::adversaries::{EpsBall, MassAccounting, Perturbation, Whitebox};
use crate::classifiers::{LearnerSpec, Trained};
use crate::error::{domain, Result};
use crate::estimate::Estimate;
use crate::rng::RngStream;
use serde::Serialize;

/// `log2((1 - kappa) / consistency_prob)`, clipped at 0; infinite when the
/// consistency probability is 0.
pub fn theorem1_lower_bound(consistency_prob: f64, kappa: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&consistency_prob) {
        return domain(format!(
            "consistency probability must lie in [0, 1], got {consistency_prob}"
        ));
    }
    if !(0.0..1.0).contains(&kappa) {
        return domain(format!("kappa must lie in [0, 1), got {kappa}"));
    }
    if consistency_prob == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(((1.0 - kappa) / consistency_prob).log2().max(0.0))
}

/// `log2(eta / (3 C delta))`, clipped at 0.
pub fn theorem3_bound(eta: f64, c: f64, delta: f64) -> Result<f64> {
    if !(eta > 0.0 && c > 0.0 && delta > 0.0) {
        return domain("eta, C and delta must be positive");
    }
    Ok((eta / (3.0 * c * delta)).log2().max(0.0))
}

/// `ln(eta / delta) / d`, the scale of the largest perturbation for which
/// the spheres lower bound applies.
pub fn bestepsilon_quantity(eta: f64, delta: f64, d: usize) -> Result<f64> {
    if !(delta > 0.0 && eta >= delta) || d == 0 {
        return domain("need eta >= delta > 0 and d >= 1");
    }
    Ok((eta / delta).ln() / d as f64)
}

/// Per trial: retrain, then test `mu(p^-1(E)) >= AR(f, eps) / 2` for each
/// perturbation returned by `choose`. Returns one estimate per perturbation.
pub fn consistency_with<F>(
    learner: &LearnerSpec,
    eps: EpsBall,
    trials: usize,
    n: usize,
    rng: &mut RngStream,
    mut choose: F,
) -> Result<Vec<Estimate>>
where
    F: FnMut(&Trained) -> Result<Vec<Perturbation>>,
{
    if trials == 0 {
        return domain("at least one trial is required");
    }
    let mut hits: Vec<u64> = Vec::new();
    for t in 0..trials {
        let base = rng.child(t as u64);
        let trained = learner.train(&mut base.child(0))?;
        let task = trained.task();
        let eval = base.child(1);
        let ar = estimate_ar_opt(
            &Whitebox::from_trained(&trained),
            &task,
            eps,
            n,
            &mut eval.clone(),
        )?;
        let family = choose(&trained)?;
        if hits.is_empty() {
            hits = vec![0; family.len()];
        } else if hits.len() != family.len() {
            return domain("perturbation family size changed between trials");
        }
        for (h, p) in hits.iter_mut().zip(&family) {
            // same evaluation points as the AR estimate
            let pulled =
                estimate_trained_ar(&trained, p, n, MassAccounting::Sampled, &mut eval.clone())?;
            if pulled.value >= 0.5 * ar.value {
                *h += 1;
            }
        }
    }
    Ok(hits
        .into_iter()
        .map(|h| Estimate::from_counts(h, trials as u64))
        .collect())
}

/// Probability over training that the fixed `p` is consistent.
pub fn estimate_consistency_prob(
    p: &Perturbation,
    learner: &LearnerSpec,
    eps: EpsBall,
    trials: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<Estimate> {
    let mut out = consistency_with(learner, eps, trials, n, rng, |_| Ok(vec![p.clone()]))?;
    Ok(out.remove(0))
}

/// The consistency bound evaluated over a finite family of perturbations.
/// The sup over the family under-estimates the sup over all perturbations,
/// so `bound_bits` is a bound given the family.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyBound {
    pub per_member: Vec<Estimate>,
    pub sup: f64,
    pub kappa: f64,
    pub bound_bits: f64,
    pub label: &'static str,
}

pub fn family_lower_bound(
    family: &[Perturbation],
    learner: &LearnerSpec,
    eps: EpsBall,
    kappa: f64,
    trials: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<FamilyBound> {
    if family.is_empty() {
        return domain("perturbation family is empty");
    }
    let per_member = consistency_with(learner, eps, trials, n, rng, |_| Ok(family.to_vec()))?;
    let sup = per_member.iter().map(|e| e.value).fold(0.0, f64::max);
    Ok(FamilyBound {
        bound_bits: theorem1_lower_bound(sup, kappa)?,
        per_member,
        sup,
        kappa,
        label: "bound given family",
    })
}
