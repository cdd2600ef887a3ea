use crate::adversaries::{EpsBall, MassAccounting, Perturbation, Whitebox};
use crate::classifiers::{Classifier, ErrorSet, Trained};
use crate::error::{domain, Result};
use crate::estimate::Estimate;
use crate::rng::RngStream;
use crate::tasks::Task;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return domain("sample count must be positive");
    }
    Ok(())
}

/// `P[f(X) != h(X)]`.
pub fn estimate_risk(
    f: &dyn Classifier,
    task: &Task,
    n: usize,
    rng: &mut RngStream,
) -> Result<Estimate> {
    check_n(n)?;
    let h = task.ground_truth();
    let mut hits = 0u64;
    for _ in 0..n {
        let x = task.sample_point(rng);
        if f.classify(&x) != h.label(&x) {
            hits += 1;
        }
    }
    Ok(Estimate::from_counts(hits, n as u64))
}

/// Monte Carlo mean of `hit(x, p(x))`, with mixture components either drawn
/// per sample or averaged over.
fn pushed_mass<H>(
    p: &Perturbation,
    task: &Task,
    n: usize,
    accounting: MassAccounting,
    rng: &mut RngStream,
    hit: H,
) -> Result<Estimate>
where
    H: Fn(&[f64], &[f64]) -> bool,
{
    check_n(n)?;
    match accounting {
        MassAccounting::Sampled => {
            let mut hits = 0u64;
            for _ in 0..n {
                let x = task.sample_point(rng);
                let y = p.apply(&x, rng);
                if hit(&x, &y) {
                    hits += 1;
                }
            }
            Ok(Estimate::from_counts(hits, n as u64))
        }
        MassAccounting::Averaged => {
            let parts = p.components();
            let values: Vec<f64> = (0..n)
                .map(|_| {
                    let x = task.sample_point(rng);
                    let c = parts
                        .iter()
                        .filter(|q| {
                            let y = q
                                .apply_deterministic(&x)
                                .expect("mixture components are single maps");
                            hit(&x, &y)
                        })
                        .count();
                    c as f64 / parts.len() as f64
                })
                .collect();
            Ok(Estimate::from_values(&values))
        }
    }
}

/// `P[f(p(X)) != h(X)]`.
pub fn estimate_ar_of_perturbation(
    f: &dyn Classifier,
    p: &Perturbation,
    task: &Task,
    n: usize,
    accounting: MassAccounting,
    rng: &mut RngStream,
) -> Result<Estimate> {
    let h = task.ground_truth();
    pushed_mass(p, task, n, accounting, rng, |x, y| {
        f.classify(y) != h.label(x)
    })
}

/// `mu(p^-1(E))`: mass of points the perturbation moves into `error`.
pub fn estimate_pullback_mass(
    error: &dyn ErrorSet,
    p: &Perturbation,
    task: &Task,
    n: usize,
    accounting: MassAccounting,
    rng: &mut RngStream,
) -> Result<Estimate> {
    pushed_mass(p, task, n, accounting, rng, |_, y| error.contains(y))
}

/// Adversarial risk of `p` against a trained classifier, in the semantics
/// matching [`estimate_ar_opt`]: for implanted caps a move counts only when
/// it lands in the error set with a label different from the source's.
pub fn estimate_trained_ar(
    trained: &Trained,
    p: &Perturbation,
    n: usize,
    accounting: MassAccounting,
    rng: &mut RngStream,
) -> Result<Estimate> {
    let task = trained.task();
    match trained {
        Trained::Implanted { classifier, .. } => {
            let h = task.ground_truth();
            pushed_mass(p, &task, n, accounting, rng, |x, y| {
                classifier.error.contains(y) && classifier.classify(y) != h.label(x)
            })
        }
        _ => estimate_ar_of_perturbation(trained.classifier(), p, &task, n, accounting, rng),
    }
}

/// `mu{x : some point within eps of x is adversarial}`. Flagged as a lower
/// bound when the white box can only search directions.
pub fn estimate_ar_opt(
    wb: &Whitebox,
    task: &Task,
    eps: EpsBall,
    n: usize,
    rng: &mut RngStream,
) -> Result<Estimate> {
    check_n(n)?;
    let h = task.ground_truth();
    let mut hits = 0u64;
    for _ in 0..n {
        let x = task.sample_point(rng);
        if wb.reachable(&x, &h, eps)? {
            hits += 1;
        }
    }
    Ok(Estimate::from_counts(hits, n as u64).with_lower_bound_only(!wb.is_exact()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::whitebox_best_response;
    use crate::classifiers::{implant_classifier, sample_cap_error, CapVariant, FnClassifier};
    use crate::geometry::{cap_threshold, CapModel};
    use crate::label::Label;
    use crate::tasks::{ConcentricSpheresTask, GroundTruth, TwoIntervalsTask};
    use std::sync::Arc;

    fn spheres(d: usize) -> Task {
        Task::ConcentricSpheres(ConcentricSpheresTask::new(d).unwrap())
    }

    #[test]
    fn risk_of_truth_and_its_negation() {
        let task = Task::TwoIntervals(TwoIntervalsTask::new(10.0, 2.0).unwrap());
        let h = task.ground_truth();
        let mut rng = RngStream::new(101, 0);
        assert_eq!(estimate_risk(&h, &task, 500, &mut rng).unwrap().value, 0.0);
        let neg = FnClassifier(move |x: &[f64]| h.label(x).flip());
        assert_eq!(
            estimate_risk(&neg, &task, 500, &mut rng).unwrap().value,
            1.0
        );
    }

    #[test]
    fn identity_ar_equals_risk_and_zero_eps_ar_opt_equals_risk() {
        let d = 20;
        let mut rng = RngStream::new(102, 0);
        let e =
            sample_cap_error(d, 0.2, 1, CapVariant::Iid, None, CapModel::Exact, &mut rng).unwrap();
        let f = implant_classifier(GroundTruth::Spheres, e.clone());
        let task = spheres(d);
        let p = Perturbation::identity(EpsBall::uniform(0.0));
        let n = 20_000;
        let risk = estimate_risk(&f, &task, n, &mut RngStream::new(7, 1)).unwrap();
        let ar = estimate_ar_of_perturbation(
            &f,
            &p,
            &task,
            n,
            MassAccounting::Sampled,
            &mut RngStream::new(7, 1),
        )
        .unwrap();
        assert_eq!(risk.value, ar.value);
        let wb = Whitebox::Caps(Arc::new(e));
        let opt = estimate_ar_opt(
            &wb,
            &task,
            EpsBall::uniform(0.0),
            n,
            &mut RngStream::new(7, 1),
        )
        .unwrap();
        assert_eq!(opt.value, risk.value);
        assert!(risk.covers(0.1, 4.0, 0.0), "{risk:?}");
    }

    #[test]
    fn best_response_attains_a_quarter() {
        let d = 50;
        let mut rng = RngStream::new(103, 0);
        let e =
            sample_cap_error(d, 0.01, 1, CapVariant::Iid, None, CapModel::Exact, &mut rng).unwrap();
        let eps = EpsBall::norm_scaled(cap_threshold(0.01, d).unwrap());
        let wb = Whitebox::Caps(Arc::new(e.clone()));
        let task = spheres(d);
        let p = whitebox_best_response(&wb, &task, eps).unwrap();
        let ar = estimate_pullback_mass(&e, &p, &task, 20_000, MassAccounting::Sampled, &mut rng)
            .unwrap();
        assert!(ar.covers(0.25, 4.0, 0.0), "{ar:?}");
        let opt = estimate_ar_opt(&wb, &task, eps, 20_000, &mut rng).unwrap();
        assert!(opt.covers(0.25, 4.0, 0.0), "{opt:?}");
        assert!(!opt.lower_bound_only);
    }

    #[test]
    fn averaged_accounting_of_mixture() {
        let task = Task::TwoIntervals(TwoIntervalsTask::new(10.0, 2.0).unwrap());
        let f = task.ground_truth();
        let eps = EpsBall::uniform(1.5);
        let up = Perturbation::from_fn(eps, |x| vec![x[0], x[1] + 1.5]);
        let down = Perturbation::from_fn(eps, |x| vec![x[0], x[1] - 1.5]);
        let p = Perturbation::mixture(eps, vec![up, down]).unwrap();
        let mut rng = RngStream::new(104, 0);
        // exactly one of the two moves crosses the midline from either line
        let avg =
            estimate_ar_of_perturbation(&f, &p, &task, 1000, MassAccounting::Averaged, &mut rng)
                .unwrap();
        assert_eq!(avg.value, 0.5);
        assert_eq!(avg.stderr, 0.0);
        let s = estimate_ar_of_perturbation(&f, &p, &task, 4000, MassAccounting::Sampled, &mut rng)
            .unwrap();
        assert!(s.covers(0.5, 4.0, 0.0));
    }

    #[test]
    fn generic_whitebox_is_flagged() {
        let task = Task::TwoIntervals(TwoIntervalsTask::new(10.0, 2.0).unwrap());
        let mut rng = RngStream::new(105, 0);
        let c: Arc<dyn Classifier> =
            Arc::new(FnClassifier(|x: &[f64]| Label::from_sign(x[1] - 0.9)));
        let wb = Whitebox::generic(c, 2, 16, &mut rng);
        let e = estimate_ar_opt(&wb, &task, EpsBall::uniform(0.2), 200, &mut rng).unwrap();
        assert!(e.lower_bound_only);
    }
}
