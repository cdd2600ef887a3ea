use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "qclab").unwrap();
        qclab_py::qclab_module(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("qclab", m).unwrap();
        f(py, &globals);
    });
}

fn eval<'py>(py: Python<'py>, g: &Bound<'py, PyDict>, expr: &str) -> Bound<'py, PyAny> {
    let code = std::ffi::CString::new(expr).unwrap();
    py.eval(&code, Some(g), None)
        .unwrap_or_else(|e| panic!("{expr}: {e}"))
}

#[test]
fn module_functions_round_trip() {
    with_module(|py, g| {
        let tau: f64 = eval(py, g, "qclab.cap_threshold(0.01, 500)")
            .extract()
            .unwrap();
        assert!((2.2..=2.4).contains(&(tau * 500f64.sqrt())));
        let back: f64 = eval(
            py,
            g,
            "qclab.cap_fraction(qclab.cap_threshold(0.2, 40), 40)",
        )
        .extract()
        .unwrap();
        assert!((back - 0.2).abs() < 1e-9);
        let bits: f64 = eval(py, g, "qclab.theorem1_lower_bound(0.0625, 0.0)")
            .extract()
            .unwrap();
        assert!((bits - 4.0).abs() < 1e-12);
        let err = py
            .eval(c"qclab.cap_threshold(1.5, 10)", Some(g), None)
            .unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}

#[test]
fn two_intervals_objects() {
    with_module(|py, g| {
        let n: usize = eval(py, g, "len(qclab.sample_two_intervals(100.0, 3.0, 5))")
            .extract()
            .unwrap();
        assert!(n > 100);
        let (gaps, ends, length, _): (f64, f64, f64, f64) = eval(
            py,
            g,
            "qclab.two_intervals_ar_exact(qclab.sample_two_intervals(100.0, 3.0, 5), 0.3)",
        )
        .extract()
        .unwrap();
        assert!((gaps + ends - length).abs() < 1e-9);
        let alpha: f64 = eval(py, g, "qclab.ParabolaGeometry(3.0).alpha_star")
            .extract()
            .unwrap();
        assert!((alpha - 0.745714).abs() < 1e-5);
        let label: i8 = eval(py, g, "qclab.ClassifierHandle.one_nn(qclab.sample_two_intervals(50.0, 2.0, 1)).classify([10.0, 0.0])")
            .extract()
            .unwrap();
        assert_eq!(label, -1);
    });
}

#[test]
fn qc_experiment_from_json() {
    with_module(|py, g| {
        let cfg = r#"{"learner": {"kind": "perceptron", "m": 40.0, "z": 2.0}, "adversary": {"kind": "line-search"},
            "alpha": 0.5, "kappa": 0.2, "budgets": [4], "trials": 3, "seed": 1, "mc_samples": 500}"#;
        g.set_item("cfg", cfg).unwrap();
        let rows: Vec<(u64, f64, f64, f64, u64)> =
            eval(py, g, "qclab.run_qc_experiment(cfg).summaries")
                .extract()
                .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].0, 4);
        g.set_item("bad", r#"{"unknown": 1}"#).unwrap();
        assert!(py
            .eval(c"qclab.run_qc_experiment(bad)", Some(g), None)
            .is_err());
    });
}
