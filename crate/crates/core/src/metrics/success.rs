use crate::estimate::Estimate;
use serde::{Deserialize, Serialize};

/// How uncertainty in the two estimates enters the success test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuccessMode {
    /// `ar_p >= alpha * ar_opt` on point estimates.
    #[default]
    Point,
    /// `ar_p - 2 se_p >= alpha * (ar_opt + 2 se_opt)`.
    Conservative,
}

/// Whether a perturbation achieved approximation constant `alpha`.
pub fn success_event(ar_p: &Estimate, ar_opt: &Estimate, alpha: f64, mode: SuccessMode) -> bool {
    if alpha <= 0.0 || ar_opt.value <= 0.0 {
        return true;
    }
    match mode {
        SuccessMode::Point => ar_p.value >= alpha * ar_opt.value,
        SuccessMode::Conservative => {
            ar_p.value - 2.0 * ar_p.stderr >= alpha * (ar_opt.value + 2.0 * ar_opt.stderr)
        }
    }
}
