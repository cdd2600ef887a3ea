//! Python bindings: cap geometry, the two-intervals task and its exact
//! adversarial risk, classifiers, the grid defense, bound calculators and
//! the QC experiment harness.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use qclab::classifiers::{
    implant_classifier, sample_cap_error, CapErrorSet, CapVariant, Classifier,
    ImplantedErrorClassifier, OneNNClassifier,
};
use qclab::geometry::CapModel;
use qclab::metrics::{self, IntervalsAr, QCExperimentConfig, QCExperimentResult};
use qclab::tasks::{self, GroundTruth};
use qclab::{Error, Label, RngStream};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

type PyRes<T> = PyResult<T>;

trait IntoPy<T> {
    fn py(self) -> PyRes<T>;
}

impl<T> IntoPy<T> for qclab::Result<T> {
    fn py(self) -> PyRes<T> {
        self.map_err(to_py)
    }
}

fn model_of(name: &str) -> PyRes<CapModel> {
    match name {
        "exact" => Ok(CapModel::Exact),
        "gaussian" => Ok(CapModel::Gaussian),
        _ => Err(PyValueError::new_err(format!("unknown cap model {name:?}"))),
    }
}

#[pyfunction]
#[pyo3(signature = (delta, d, model = "exact"))]
fn cap_threshold(delta: f64, d: usize, model: &str) -> PyRes<f64> {
    qclab::geometry::cap_threshold_with(delta, d, model_of(model)?).py()
}

#[pyfunction]
fn cap_fraction(tau: f64, d: usize) -> PyRes<f64> {
    qclab::geometry::cap_fraction(tau, d).py()
}

/// `(lower, upper)` bounds on the standard normal upper tail at `t`.
#[pyfunction]
fn gaussian_tail_bounds(t: f64) -> (f64, f64) {
    qclab::geometry::gaussian_tail_bounds(t)
}

#[pyfunction]
fn theorem1_lower_bound(consistency_prob: f64, kappa: f64) -> PyRes<f64> {
    metrics::theorem1_lower_bound(consistency_prob, kappa).py()
}

#[pyfunction]
fn theorem3_bound(eta: f64, c: f64, delta: f64) -> PyRes<f64> {
    metrics::theorem3_bound(eta, c, delta).py()
}

#[pyfunction]
fn bestepsilon_quantity(eta: f64, delta: f64, d: usize) -> PyRes<f64> {
    metrics::bestepsilon_quantity(eta, delta, d).py()
}

#[pyfunction]
fn axis_crossing_probability(delta: f64, side: f64) -> f64 {
    qclab::defense::axis_crossing_probability(delta, side)
}

/// A labeled sample together with its task.
#[pyclass(module = "qclab", frozen)]
struct Dataset(tasks::Dataset);

#[pymethods]
impl Dataset {
    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.0.points().map(<[f64]>::to_vec).collect()
    }

    fn labels(&self) -> Vec<i8> {
        self.0.samples.iter().map(|s| s.label.as_i8()).collect()
    }

    /// Sorted coordinates of the samples on the line carrying `label`.
    fn line_coordinates(&self, label: i8) -> Vec<f64> {
        self.0
            .line_coordinates(if label < 0 { Label::Neg } else { Label::Pos })
    }

    fn to_csv(&self) -> PyRes<String> {
        let mut buf = Vec::new();
        self.0.write_csv(&mut buf).py()?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }
}

#[pyfunction]
fn sample_two_intervals(m: f64, z: f64, seed: u64) -> PyRes<Dataset> {
    tasks::sample_two_intervals_poisson(m, z, &mut RngStream::new(seed, 0))
        .py()
        .map(Dataset)
}

#[pyfunction]
fn sample_concentric_spheres(d: usize, n: usize, seed: u64) -> PyRes<Dataset> {
    tasks::sample_concentric_spheres(d, n, &mut RngStream::new(seed, 0))
        .py()
        .map(Dataset)
}

/// Reachable error lengths: `(gaps, ends, length, fraction)`.
fn ar_tuple(a: IntervalsAr) -> (f64, f64, f64, f64) {
    (a.gaps, a.ends, a.length, a.fraction)
}

#[pyfunction]
fn two_intervals_ar_exact(dataset: &Dataset, eps: f64) -> PyRes<(f64, f64, f64, f64)> {
    metrics::two_intervals_ar_exact(&dataset.0, eps)
        .py()
        .map(ar_tuple)
}

#[pyfunction]
fn two_intervals_ar_grid(dataset: &Dataset, eps: f64, step: f64) -> PyRes<(f64, f64, f64, f64)> {
    metrics::two_intervals_ar_grid(&dataset.0, eps, step)
        .py()
        .map(ar_tuple)
}

/// Geometry of the 1-NN error region between one line's samples at
/// `eps = z/10`.
#[pyclass(module = "qclab", frozen)]
struct ParabolaGeometry(metrics::ParabolaGeometry);

#[pymethods]
impl ParabolaGeometry {
    #[new]
    fn new(z: f64) -> PyRes<Self> {
        metrics::ParabolaGeometry::new(z).py().map(Self)
    }

    #[getter]
    fn alpha_star(&self) -> f64 {
        self.0.alpha_star
    }

    #[getter]
    fn x_star(&self) -> f64 {
        self.0.x_star
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps()
    }

    #[getter]
    fn onset(&self) -> f64 {
        self.0.onset()
    }

    #[getter]
    fn junction(&self) -> f64 {
        self.0.junction()
    }

    /// Reachable error length inside a gap of length `l`.
    fn nu(&self, l: f64) -> f64 {
        self.0.nu(l)
    }

    /// Reachable error length in an end interval of length `l`.
    fn end_length(&self, l: f64) -> f64 {
        self.0.end_length(l)
    }
}

enum Base {
    OneNn(OneNNClassifier),
    Cap(ImplantedErrorClassifier<CapErrorSet>),
}

impl Classifier for Base {
    fn classify(&self, x: &[f64]) -> Label {
        match self {
            Base::OneNn(c) => c.classify(x),
            Base::Cap(c) => c.classify(x),
        }
    }
}

/// A trained or implanted classifier.
#[pyclass(module = "qclab", frozen)]
struct ClassifierHandle(Base);

#[pymethods]
impl ClassifierHandle {
    /// 1-NN on `dataset`.
    #[staticmethod]
    fn one_nn(dataset: &Dataset) -> PyRes<Self> {
        OneNNClassifier::from_dataset(&dataset.0)
            .py()
            .map(|c| Self(Base::OneNn(c)))
    }

    /// Concentric-spheres ground truth with a `Caps_k^iid(delta)` error set.
    #[staticmethod]
    #[pyo3(signature = (d, delta, seed, k = 1))]
    fn implanted_cap(d: usize, delta: f64, seed: u64, k: usize) -> PyRes<Self> {
        let e = sample_cap_error(
            d,
            delta,
            k,
            CapVariant::Iid,
            None,
            CapModel::Exact,
            &mut RngStream::new(seed, 0),
        )
        .py()?;
        Ok(Self(Base::Cap(implant_classifier(GroundTruth::Spheres, e))))
    }

    fn classify(&self, x: Vec<f64>) -> i8 {
        self.0.classify(&x).as_i8()
    }

    /// Cap threshold of an implanted classifier; `None` for 1-NN.
    #[getter]
    fn tau(&self) -> Option<f64> {
        match &self.0 {
            Base::Cap(c) => Some(c.error.tau),
            Base::OneNn(_) => None,
        }
    }

    /// Probability over grid shifts of side `side` that the smoothed labels
    /// of `x` and `x2` differ.
    fn flip_probability(
        &self,
        side: f64,
        x: Vec<f64>,
        x2: Vec<f64>,
        n: usize,
        seed: u64,
    ) -> PyRes<(f64, f64)> {
        if x.len() != x2.len() {
            return Err(PyValueError::new_err("points must have the same dimension"));
        }
        let e = qclab::defense::flip_probability(
            &self.0,
            side,
            &x,
            &x2,
            n,
            &mut RngStream::new(seed, 0),
        )
        .py()?;
        Ok((e.value, e.stderr))
    }

    /// Labels of the grid-smoothed classifier at each of `xs`, for one
    /// shift drawn from `seed`.
    fn smoothed_labels(
        &self,
        py: Python<'_>,
        side: f64,
        xs: Vec<Vec<f64>>,
        seed: u64,
    ) -> PyRes<Vec<i8>> {
        let d = xs.first().map_or(0, Vec::len);
        let base = BaseRef(&self.0);
        py.detach(|| {
            let s = qclab::defense::defense_wrap(base, d, side, &mut RngStream::new(seed, 0))?;
            Ok(xs.iter().map(|x| s.classify(x).as_i8()).collect())
        })
        .py()
    }
}

struct BaseRef<'a>(&'a Base);

impl Classifier for BaseRef<'_> {
    fn classify(&self, x: &[f64]) -> Label {
        self.0.classify(x)
    }
}

/// Per-budget outcome of a QC experiment.
#[pyclass(module = "qclab", frozen)]
struct QCResult(QCExperimentResult);

#[pymethods]
impl QCResult {
    /// `[(budget, rate, ci_lo, ci_hi, violations)]` in budget order.
    #[getter]
    fn summaries(&self) -> Vec<(u64, f64, f64, f64, u64)> {
        self.0
            .summaries
            .iter()
            .map(|s| (s.budget, s.rate, s.ci_lo, s.ci_hi, s.violations))
            .collect()
    }

    #[getter]
    fn empirical_qc(&self) -> Option<u64> {
        self.0.empirical_qc
    }

    fn to_csv(&self) -> PyRes<String> {
        let mut buf = Vec::new();
        self.0.write_csv(&mut buf).py()?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn summary_json(&self) -> PyRes<String> {
        self.0.summary_json().py()
    }
}

/// Runs a QC experiment described by a JSON config with the harness
/// fields (`learner`, `adversary`, `alpha`, `kappa`, `budgets`, `trials`,
/// `seed`, ...).
#[pyfunction]
#[pyo3(signature = (config_json, workers = None))]
fn run_qc_experiment(py: Python<'_>, config_json: &str, workers: Option<usize>) -> PyRes<QCResult> {
    let cfg: QCExperimentConfig = serde_json::from_str(config_json)
        .map_err(|e| PyValueError::new_err(format!("invalid config: {e}")))?;
    cfg.validate().py()?;
    py.detach(|| {
        metrics::with_workers(workers, || metrics::run_qc_experiment(&cfg)).and_then(|r| r)
    })
    .py()
    .map(QCResult)
}

#[pymodule]
#[pyo3(name = "qclab")]
pub fn qclab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(cap_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(cap_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_tail_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(theorem3_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bestepsilon_quantity, m)?)?;
    m.add_function(wrap_pyfunction!(axis_crossing_probability, m)?)?;
    m.add_function(wrap_pyfunction!(sample_two_intervals, m)?)?;
    m.add_function(wrap_pyfunction!(sample_concentric_spheres, m)?)?;
    m.add_function(wrap_pyfunction!(two_intervals_ar_exact, m)?)?;
    m.add_function(wrap_pyfunction!(two_intervals_ar_grid, m)?)?;
    m.add_function(wrap_pyfunction!(run_qc_experiment, m)?)?;
    m.add_class::<Dataset>()?;
    m.add_class::<ParabolaGeometry>()?;
    m.add_class::<ClassifierHandle>()?;
    m.add_class::<QCResult>()?;
    Ok(())
}
