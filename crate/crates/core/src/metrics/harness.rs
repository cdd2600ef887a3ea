use super::estimators::{estimate_ar_opt, estimate_trained_ar};
use super::success::{success_event, SuccessMode};
use crate::adversaries::{
    run_adversary, sample_query_sets, Adversary, CapAdversary, DeterministicCapAdversary, EpsBall,
    LineSearchAdversary, MassAccounting, Perturbation, Whitebox,
};
use crate::classifiers::{CountedOracle, LearnerSpec, Trained};
use crate::error::{domain, Error, Result};
use crate::estimate::wilson_interval;
use crate::geometry::{cap_threshold_with, Point};
use crate::rng::RngStream;
use crate::tasks::Task;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// The attack run at each budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversarySpec {
    /// Fresh query sets per trial; budget `q` allows `q/2` per sphere.
    /// Budgets below 2 leave the identity.
    CapRandomized,
    /// Query sets drawn once from `query_seed` and reused by every trial.
    CapDeterministic { query_seed: u64 },
    /// Two bisections; budget `q` allows `q/2` steps per column.
    LineSearch,
    /// Makes no queries and returns the identity.
    Identity,
}

fn default_mc() -> usize {
    20_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QCExperimentConfig {
    pub learner: LearnerSpec,
    pub adversary: AdversarySpec,
    /// Perturbation radius; defaults to the cap threshold on the spheres
    /// task and to `z/10` on the two-intervals task.
    #[serde(default)]
    pub eps: Option<f64>,
    pub alpha: f64,
    pub kappa: f64,
    pub budgets: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    /// Monte Carlo samples per risk estimate.
    #[serde(default = "default_mc")]
    pub mc_samples: usize,
    #[serde(default)]
    pub success_mode: SuccessMode,
    #[serde(default)]
    pub accounting: MassAccounting,
}

impl QCExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return bad(format!("kappa must lie in [0, 1], got {}", self.kappa));
        }
        if self.budgets.is_empty() || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return bad("budgets must be non-empty and strictly increasing".into());
        }
        if self.trials == 0 || self.mc_samples == 0 {
            return bad("trials and mc_samples must be positive".into());
        }
        if let Some(e) = self.eps {
            if !(e.is_finite() && e >= 0.0) {
                return bad(format!("eps must be finite and non-negative, got {e}"));
            }
        }
        let task = self
            .learner
            .task()
            .map_err(|e| Error::Config(e.to_string()))?;
        let fits = matches!(
            (&self.adversary, &task),
            (AdversarySpec::Identity, _)
                | (AdversarySpec::LineSearch, Task::TwoIntervals(_))
                | (
                    AdversarySpec::CapRandomized | AdversarySpec::CapDeterministic { .. },
                    Task::ConcentricSpheres(_)
                )
        );
        if !fits {
            return bad("adversary does not apply to the learner's task".into());
        }
        Ok(())
    }

    /// The perturbation ball used by attacks and by `AR(f, eps)`.
    pub fn eps_ball(&self) -> Result<EpsBall> {
        Ok(match (&self.learner, self.eps) {
            (LearnerSpec::ImplantedCap { d, delta, k, model }, e) => {
                let e = match e {
                    Some(e) => e,
                    None => cap_threshold_with(delta / *k as f64, *d, *model)?,
                };
                EpsBall::norm_scaled(e)
            }
            (LearnerSpec::OneNn { z, .. } | LearnerSpec::Perceptron { z, .. }, e) => {
                EpsBall::uniform(e.unwrap_or(z / 10.0))
            }
        })
    }
}

/// One (budget, trial) outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub budget: u64,
    pub trial: usize,
    pub queries_used: u64,
    pub ar_p: f64,
    pub ar_opt: f64,
    pub success: bool,
    pub budget_violation: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetSummary {
    pub budget: u64,
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub violations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QCExperimentResult {
    pub summaries: Vec<BudgetSummary>,
    /// Least budget whose success rate reaches `1 - kappa`.
    pub empirical_qc: Option<u64>,
    pub records: Vec<TrialRecord>,
}

impl QCExperimentResult {
    pub fn budget_violations(&self) -> u64 {
        self.summaries.iter().map(|s| s.violations).sum()
    }

    /// `budget,trial,queries_used,ar_p,ar_opt,success`, ordered by budget
    /// then trial.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "budget",
            "trial",
            "queries_used",
            "ar_p",
            "ar_opt",
            "success",
        ])?;
        for r in &self.records {
            out.write_record([
                r.budget.to_string(),
                r.trial.to_string(),
                r.queries_used.to_string(),
                r.ar_p.to_string(),
                r.ar_opt.to_string(),
                r.success.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `{"<budget>": [rate, ci_lo, ci_hi], ...}` in budget order.
    pub fn summary_json(&self) -> Result<String> {
        let mut s = String::from("{");
        for (i, b) in self.summaries.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&format!(
                "\"{}\":{}",
                b.budget,
                serde_json::to_string(&[b.rate, b.ci_lo, b.ci_hi])?
            ));
        }
        s.push('}');
        Ok(s)
    }
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => domain("worker count must be positive"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

struct FrozenSets {
    q_minus: Vec<Point>,
    q_plus: Vec<Point>,
}

fn build_adversary(
    cfg: &QCExperimentConfig,
    budget: u64,
    eps: EpsBall,
    frozen: Option<&FrozenSets>,
) -> Result<Box<dyn Adversary>> {
    let half = (budget / 2) as usize;
    let cap = matches!(
        cfg.adversary,
        AdversarySpec::CapRandomized | AdversarySpec::CapDeterministic { .. }
    );
    if cap && half == 0 {
        return Ok(Box::new(IdentityAdversary(eps)));
    }
    Ok(match (&cfg.adversary, &cfg.learner) {
        (AdversarySpec::CapRandomized, LearnerSpec::ImplantedCap { d, .. }) => {
            Box::new(CapAdversary {
                d: *d,
                s: half,
                eps,
            })
        }
        (AdversarySpec::CapDeterministic { .. }, LearnerSpec::ImplantedCap { .. }) => {
            let f = frozen.expect("frozen sets are drawn for deterministic cap attacks");
            Box::new(DeterministicCapAdversary {
                q_minus: f.q_minus[..half].to_vec(),
                q_plus: f.q_plus[..half].to_vec(),
                eps,
            })
        }
        (
            AdversarySpec::LineSearch,
            LearnerSpec::OneNn { m, z } | LearnerSpec::Perceptron { m, z },
        ) => {
            let steps = i32::try_from(half).unwrap_or(i32::MAX).min(1000);
            Box::new(LineSearchAdversary {
                m: *m,
                z: *z,
                tol: z / 2f64.powi(steps),
                eps: eps.eps,
            })
        }
        (AdversarySpec::Identity, _) => Box::new(IdentityAdversary(eps)),
        _ => {
            return Err(Error::Config(
                "adversary does not apply to the learner's task".into(),
            ))
        }
    })
}

struct IdentityAdversary(EpsBall);

impl Adversary for IdentityAdversary {
    fn attack(
        &self,
        _: &mut dyn crate::classifiers::LabelOracle,
        _: &mut RngStream,
    ) -> Result<crate::adversaries::AttackOutput> {
        Ok(crate::adversaries::AttackOutput::new(
            Perturbation::identity(self.0),
        ))
    }

    fn is_randomized(&self) -> bool {
        false
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("{what} is not finite")))
    }
}

fn run_trial(
    cfg: &QCExperimentConfig,
    trial: usize,
    eps: EpsBall,
    frozen: Option<&FrozenSets>,
) -> Result<Vec<TrialRecord>> {
    let base = RngStream::for_trial(cfg.seed, trial as u64);
    let trained: Trained = cfg.learner.train(&mut base.child(0))?;
    let task = trained.task();
    let ar_opt = estimate_ar_opt(
        &Whitebox::from_trained(&trained),
        &task,
        eps,
        cfg.mc_samples,
        &mut base.child(1),
    )?;
    finite(ar_opt.value, "AR(f, eps)")?;
    let mut records = Vec::with_capacity(cfg.budgets.len());
    for (bi, &budget) in cfg.budgets.iter().enumerate() {
        let adversary = build_adversary(cfg, budget, eps, frozen)?;
        let mut oracle = CountedOracle::new(trained.classifier()).with_budget(budget);
        let mut attack_rng = base.child(2 + 2 * bi as u64);
        let record = match run_adversary(adversary.as_ref(), &mut oracle, &mut attack_rng) {
            Ok(report) => {
                let mut eval = base.child(3 + 2 * bi as u64);
                let ar_p = estimate_trained_ar(
                    &trained,
                    &report.perturbation,
                    cfg.mc_samples,
                    cfg.accounting,
                    &mut eval,
                )?;
                finite(ar_p.value, "AR(f, p)")?;
                TrialRecord {
                    budget,
                    trial,
                    queries_used: report.queries_used,
                    ar_p: ar_p.value,
                    ar_opt: ar_opt.value,
                    success: success_event(&ar_p, &ar_opt, cfg.alpha, cfg.success_mode),
                    budget_violation: false,
                    failure: report.failure,
                }
            }
            Err(Error::BudgetExceeded { .. }) => TrialRecord {
                budget,
                trial,
                queries_used: oracle.query_count(),
                ar_p: 0.0,
                ar_opt: ar_opt.value,
                success: false,
                budget_violation: true,
                failure: Some("query budget exceeded".into()),
            },
            Err(e) => return Err(e),
        };
        records.push(record);
    }
    Ok(records)
}

/// Runs every (budget, trial) pair. Each trial trains once and is attacked
/// at every budget; all randomness derives from `cfg.seed` and the trial
/// index, so results do not depend on the thread count.
pub fn run_qc_experiment(cfg: &QCExperimentConfig) -> Result<QCExperimentResult> {
    cfg.validate()?;
    let eps = cfg.eps_ball()?;
    let frozen = match (&cfg.adversary, &cfg.learner) {
        (AdversarySpec::CapDeterministic { query_seed }, LearnerSpec::ImplantedCap { d, .. }) => {
            let most = (*cfg.budgets.last().expect("validated") / 2) as usize;
            let (q_minus, q_plus) =
                sample_query_sets(*d, most, &mut RngStream::new(*query_seed, 0));
            Some(FrozenSets { q_minus, q_plus })
        }
        _ => None,
    };
    let per_trial: Vec<Vec<TrialRecord>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t, eps, frozen.as_ref()))
        .collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(cfg.trials * cfg.budgets.len());
    for bi in 0..cfg.budgets.len() {
        records.extend(per_trial.iter().map(|r| r[bi].clone()));
    }
    let summaries: Vec<BudgetSummary> = cfg
        .budgets
        .iter()
        .map(|&budget| {
            let rs = records.iter().filter(|r| r.budget == budget);
            let (mut successes, mut trials, mut violations) = (0, 0, 0);
            for r in rs {
                trials += 1;
                successes += r.success as u64;
                violations += r.budget_violation as u64;
            }
            let (ci_lo, ci_hi) = wilson_interval(successes, trials, 1.96);
            BudgetSummary {
                budget,
                successes,
                trials,
                rate: successes as f64 / trials as f64,
                ci_lo,
                ci_hi,
                violations,
            }
        })
        .collect();
    let empirical_qc = summaries
        .iter()
        .find(|s| s.rate >= 1.0 - cfg.kappa)
        .map(|s| s.budget);
    Ok(QCExperimentResult {
        summaries,
        empirical_qc,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_cfg(m: f64) -> QCExperimentConfig {
        QCExperimentConfig {
            learner: LearnerSpec::Perceptron { m, z: 2.0 },
            adversary: AdversarySpec::LineSearch,
            eps: None,
            alpha: 0.5,
            kappa: 0.2,
            budgets: vec![0, 8, 24],
            trials: 6,
            seed: 5,
            mc_samples: 2000,
            success_mode: SuccessMode::Point,
            accounting: MassAccounting::Sampled,
        }
    }

    #[test]
    fn validation() {
        let mut c = line_cfg(50.0);
        assert!(c.validate().is_ok());
        c.budgets = vec![8, 8];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = line_cfg(50.0);
        c.adversary = AdversarySpec::CapRandomized;
        assert!(c.validate().is_err());
        let mut c = line_cfg(50.0);
        c.alpha = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn records_and_exports() {
        let cfg = line_cfg(50.0);
        let r = run_qc_experiment(&cfg).unwrap();
        assert_eq!(r.records.len(), 18);
        assert!(r.records.iter().all(|x| x.queries_used <= x.budget));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("budget,trial,queries_used,ar_p,ar_opt,success\n"));
        assert_eq!(text.lines().count(), 19);
        let json: serde_json::Value = serde_json::from_str(&r.summary_json().unwrap()).unwrap();
        assert_eq!(json["24"].as_array().unwrap().len(), 3);
        assert_eq!(r.budget_violations(), 0);
    }

    #[test]
    fn same_result_for_any_worker_count() {
        let cfg = line_cfg(50.0);
        let a = with_workers(Some(1), || run_qc_experiment(&cfg))
            .unwrap()
            .unwrap();
        let b = with_workers(Some(3), || run_qc_experiment(&cfg))
            .unwrap()
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let text = r#"{"learner":{"kind":"perceptron","m":10,"z":2},"adversary":{"kind":"line-search"},
            "alpha":0.5,"kappa":0.1,"budgets":[2],"trials":1,"seed":1,"bogus":3}"#;
        assert!(serde_json::from_str::<QCExperimentConfig>(text).is_err());
    }
}
