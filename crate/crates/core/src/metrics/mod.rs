//! Risk and adversarial-risk estimators, exact two-intervals geometry,
//! success events, the query-complexity harness and bound calculators.

mod bounds;
mod estimators;
mod harness;
mod intervals;
mod success;

pub use bounds::{
    bestepsilon_quantity, consistency_with, estimate_consistency_prob, family_lower_bound,
    theorem1_lower_bound, theorem3_bound, FamilyBound,
};
pub use estimators::{
    estimate_ar_of_perturbation, estimate_ar_opt, estimate_pullback_mass, estimate_risk,
    estimate_trained_ar,
};
pub use harness::{
    run_qc_experiment, with_workers, AdversarySpec, BudgetSummary, QCExperimentConfig,
    QCExperimentResult, TrialRecord,
};
pub use intervals::{
    continuum_reachable, line_quadrature, solve_alpha_star, two_intervals_ar_exact,
    two_intervals_ar_grid, IntervalsAr, ParabolaGeometry,
};
pub use success::{success_event, SuccessMode};
