use super::{
    implant_classifier, sample_cap_error, train_linear_erm, CapErrorSet, CapVariant, Classifier,
    ImplantedErrorClassifier, LinearSeparator, OneNNClassifier,
};
use crate::error::Result;
use crate::geometry::CapModel;
use crate::rng::RngStream;
use crate::tasks::{
    sample_two_intervals_poisson, ConcentricSpheresTask, Dataset, GroundTruth, Task,
    TwoIntervalsTask,
};
use serde::{Deserialize, Serialize};

fn one() -> usize {
    1
}

/// A learning algorithm together with the task it is trained on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LearnerSpec {
    /// 1-NN on a Poisson sample of the two-intervals task.
    OneNn { m: f64, z: f64 },
    /// Perceptron on a Poisson sample of the two-intervals task.
    Perceptron { m: f64, z: f64 },
    /// Concentric spheres with an error set drawn from `Caps_k^iid(delta)`.
    ImplantedCap {
        d: usize,
        delta: f64,
        #[serde(default = "one")]
        k: usize,
        #[serde(default)]
        model: CapModel,
    },
}

/// The output of one training run.
#[derive(Clone, Debug)]
pub enum Trained {
    OneNn {
        classifier: OneNNClassifier,
        dataset: Dataset,
    },
    Linear {
        separator: LinearSeparator,
        dataset: Dataset,
    },
    Implanted {
        classifier: ImplantedErrorClassifier<CapErrorSet>,
        task: Task,
    },
}

impl LearnerSpec {
    pub fn task(&self) -> Result<Task> {
        Ok(match *self {
            LearnerSpec::OneNn { m, z } | LearnerSpec::Perceptron { m, z } => {
                Task::TwoIntervals(TwoIntervalsTask::new(m, z)?)
            }
            LearnerSpec::ImplantedCap { d, .. } => {
                Task::ConcentricSpheres(ConcentricSpheresTask::new(d)?)
            }
        })
    }

    pub fn train(&self, rng: &mut RngStream) -> Result<Trained> {
        Ok(match *self {
            LearnerSpec::OneNn { m, z } => {
                let dataset = sample_two_intervals_poisson(m, z, rng)?;
                let classifier = OneNNClassifier::from_dataset(&dataset)?;
                Trained::OneNn {
                    classifier,
                    dataset,
                }
            }
            LearnerSpec::Perceptron { m, z } => {
                let dataset = sample_two_intervals_poisson(m, z, rng)?;
                let separator = train_linear_erm(&dataset, rng)?;
                Trained::Linear { separator, dataset }
            }
            LearnerSpec::ImplantedCap { d, delta, k, model } => {
                let task = self.task()?;
                let error = sample_cap_error(d, delta, k, CapVariant::Iid, None, model, rng)?;
                Trained::Implanted {
                    classifier: implant_classifier(GroundTruth::Spheres, error),
                    task,
                }
            }
        })
    }
}

impl Trained {
    pub fn classifier(&self) -> &dyn Classifier {
        match self {
            Trained::OneNn { classifier, .. } => classifier,
            Trained::Linear { separator, .. } => separator,
            Trained::Implanted { classifier, .. } => classifier,
        }
    }

    pub fn task(&self) -> Task {
        match self {
            Trained::OneNn { dataset, .. } | Trained::Linear { dataset, .. } => dataset.task,
            Trained::Implanted { task, .. } => *task,
        }
    }

    /// Whether `x` lies in the error set `{f != h}`.
    pub fn in_error_set(&self, x: &[f64]) -> bool {
        self.classifier().classify(x) != self.task().ground_truth().label(x)
    }
}
