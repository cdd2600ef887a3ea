//! Experiment config files (TOML). Unknown keys are rejected everywhere.

use qclab::adversaries::MassAccounting;
use qclab::classifiers::LearnerSpec;
use qclab::geometry::CapModel;
use qclab::metrics::{AdversarySpec, QCExperimentConfig, SuccessMode};
use qclab::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    /// Output directory; created if missing.
    pub output: PathBuf,
    /// Worker threads; the `QCLAB_WORKERS` variable takes precedence.
    #[serde(default)]
    pub workers: Option<usize>,
    pub experiment: Experiment,
}

fn default_mc() -> usize {
    20_000
}

fn default_trials() -> usize {
    100
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmulationVariant {
    #[default]
    Iid,
    General,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Cap thresholds for each dimension.
    Tau {
        delta: f64,
        d: Vec<usize>,
        #[serde(default)]
        model: CapModel,
    },
    /// Cap attack with `s` queries per sphere against `Cap(delta)`.
    CapAttack {
        d: usize,
        delta: f64,
        s: u64,
        #[serde(default = "default_trials")]
        trials: usize,
        /// Freeze one seeded pair of query sets for all trials.
        #[serde(default)]
        frozen_queries: bool,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_mc")]
        mc_samples: usize,
    },
    /// An emulation reduction wrapped around a randomized cap attack.
    Emulate {
        #[serde(default)]
        variant: EmulationVariant,
        d: usize,
        delta: f64,
        k: usize,
        inner_s: usize,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default)]
        accounting: MassAccounting,
        #[serde(default = "default_mc")]
        mc_samples: usize,
    },
    /// Closed-form vs grid adversarial risk of 1-NN on Poisson datasets.
    TwoIntervals {
        m: f64,
        z: f64,
        datasets: usize,
        /// Grid step; defaults to `z / 2000`.
        #[serde(default)]
        grid_step: Option<f64>,
    },
    /// Success rate against query budget.
    QcCurve {
        learner: LearnerSpec,
        adversary: AdversarySpec,
        #[serde(default)]
        eps: Option<f64>,
        alpha: f64,
        kappa: f64,
        budgets: Vec<u64>,
        trials: usize,
        #[serde(default = "default_mc")]
        mc_samples: usize,
        #[serde(default)]
        success_mode: SuccessMode,
        #[serde(default)]
        accounting: MassAccounting,
    },
    /// Flip probabilities and risk inflation of the grid defense on an
    /// implanted-cap classifier.
    DefenseEval {
        d: usize,
        delta: f64,
        side: f64,
        displacements: Vec<f64>,
        /// Base points per displacement.
        #[serde(default = "default_points")]
        points: usize,
        /// Shift draws per point, and shifts for the risk ratio.
        #[serde(default = "default_shifts")]
        shifts: usize,
        #[serde(default = "default_mc")]
        mc_samples: usize,
    },
    /// 1-NN label raster with error mask.
    BoundaryDump { m: f64, z: f64, resolution: usize },
}

fn default_alpha() -> f64 {
    0.5
}

fn default_shifts() -> usize {
    50
}

fn default_points() -> usize {
    200
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The harness config for the experiments that run through it.
    pub fn qc_config(&self) -> Option<QCExperimentConfig> {
        match &self.experiment {
            Experiment::QcCurve {
                learner,
                adversary,
                eps,
                alpha,
                kappa,
                budgets,
                trials,
                mc_samples,
                success_mode,
                accounting,
            } => Some(QCExperimentConfig {
                learner: learner.clone(),
                adversary: adversary.clone(),
                eps: *eps,
                alpha: *alpha,
                kappa: *kappa,
                budgets: budgets.clone(),
                trials: *trials,
                seed: self.seed,
                mc_samples: *mc_samples,
                success_mode: *success_mode,
                accounting: *accounting,
            }),
            Experiment::CapAttack {
                d,
                delta,
                s,
                trials,
                frozen_queries,
                alpha,
                mc_samples,
            } => Some(QCExperimentConfig {
                learner: LearnerSpec::ImplantedCap {
                    d: *d,
                    delta: *delta,
                    k: 1,
                    model: CapModel::Exact,
                },
                adversary: if *frozen_queries {
                    AdversarySpec::CapDeterministic {
                        query_seed: self.seed,
                    }
                } else {
                    AdversarySpec::CapRandomized
                },
                eps: None,
                alpha: *alpha,
                kappa: 0.1,
                budgets: vec![2 * s],
                trials: *trials,
                seed: self.seed,
                mc_samples: *mc_samples,
                success_mode: SuccessMode::Point,
                accounting: MassAccounting::Sampled,
            }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_sections() {
        let text = r#"
seed = 3
output = "out"

[experiment]
kind = "qc-curve"
alpha = 0.5
kappa = 0.1
budgets = [2, 8]
trials = 4

[experiment.learner]
kind = "perceptron"
m = 50.0
z = 2.0

[experiment.adversary]
kind = "line-search"
"#;
        let c = ConfigFile::parse(text).unwrap();
        let q = c.qc_config().unwrap();
        assert_eq!(q.seed, 3);
        assert_eq!(q.mc_samples, 20_000);
    }

    #[test]
    fn rejects_unknown_keys_at_every_level() {
        let base =
            "seed = 1\noutput = \"o\"\n[experiment]\nkind = \"tau\"\ndelta = 0.01\nd = [10]\n";
        assert!(ConfigFile::parse(base).is_ok());
        assert!(ConfigFile::parse(&format!("{base}extra = 1\n")).is_err());
        assert!(ConfigFile::parse(&base.replace("seed = 1", "seed = 1\nbogus = 2")).is_err());
        let err = ConfigFile::parse("seed = \"x\"").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }
}
