use qclab::adversaries::{whitebox_best_response, EpsBall, Whitebox};
use qclab::classifiers::{Classifier, OneNNClassifier};
use qclab::metrics::{
    estimate_ar_opt, line_quadrature, two_intervals_ar_exact, two_intervals_ar_grid,
    ParabolaGeometry,
};
use qclab::tasks::{sample_two_intervals_poisson, Task};
use qclab::{Label, RngStream};

/// Brute-force real 1-NN reachability: scan a polar grid of the eps-disk.
fn disk_reachable(c: &OneNNClassifier, x: &[f64], h: Label, eps: f64) -> bool {
    if c.classify(x) != h {
        return true;
    }
    (1..=40).any(|i| {
        let r = eps * i as f64 / 40.0;
        (0..180).any(|j| {
            let a = std::f64::consts::TAU * j as f64 / 180.0;
            c.classify(&[x[0] + r * a.cos(), x[1] + r * a.sin()]) != h
        })
    })
}

#[test]
fn exact_one_nn_reach_matches_disk_scan() {
    let s = sample_two_intervals_poisson(100.0, 3.0, &mut RngStream::new(501, 0)).unwrap();
    let c = OneNNClassifier::from_dataset(&s).unwrap();
    let Task::TwoIntervals(task) = s.task else {
        unreachable!()
    };
    let h = s.task.ground_truth();
    let wb = Whitebox::OneNn(std::sync::Arc::new(c.clone()));
    let eps = EpsBall::uniform(0.3);
    let step = 0.02;
    let exact = line_quadrature(&task, step, |x, _| wb.reachable(x, &h, eps)).unwrap();
    let brute = line_quadrature(&task, step, |x, _| {
        Ok(disk_reachable(&c, x, h.label(x), 0.3))
    })
    .unwrap();
    // the disk scan can only miss reachable points
    assert!(brute <= exact + 1e-9, "{brute} vs {exact}");
    assert!(
        exact - brute <= 0.02 * exact + 4.0 * step,
        "{brute} vs {exact}"
    );
}

#[test]
fn best_response_realizes_ar_opt() {
    let s = sample_two_intervals_poisson(300.0, 3.0, &mut RngStream::new(502, 0)).unwrap();
    let c = OneNNClassifier::from_dataset(&s).unwrap();
    let Task::TwoIntervals(task) = s.task else {
        unreachable!()
    };
    let h = s.task.ground_truth();
    let wb = Whitebox::OneNn(std::sync::Arc::new(c.clone()));
    let eps = EpsBall::uniform(0.3);
    let p = whitebox_best_response(&wb, &s.task, eps).unwrap();
    let step = 0.01;
    let opt = line_quadrature(&task, step, |x, _| wb.reachable(x, &h, eps)).unwrap();
    let got = line_quadrature(&task, step, |x, _| {
        let y = p.apply_deterministic(x).unwrap();
        assert!(p.certifies(x));
        Ok(c.classify(&y) != h.label(x))
    })
    .unwrap();
    assert!((opt - got).abs() <= 1e-9 + 0.001 * opt, "{got} vs {opt}");
    let mc = estimate_ar_opt(&wb, &s.task, eps, 40_000, &mut RngStream::new(502, 1)).unwrap();
    assert!(
        mc.covers(opt / 600.0, 4.0, 0.0),
        "{mc:?} vs {}",
        opt / 600.0
    );
}

#[test]
fn closed_form_tracks_library_grid_across_seeds() {
    for seed in 0..5 {
        let s =
            sample_two_intervals_poisson(200.0, 3.0, &mut RngStream::for_trial(503, seed)).unwrap();
        let exact = two_intervals_ar_exact(&s, 0.3).unwrap();
        let grid = two_intervals_ar_grid(&s, 0.3, 0.0015).unwrap();
        assert!((exact.length - grid.length).abs() <= 0.01 * exact.length + 0.01);
        assert!((exact.ends - grid.ends).abs() <= 0.01);
    }
}

#[test]
fn grid_ar_is_monotone_in_eps() {
    let s = sample_two_intervals_poisson(200.0, 3.0, &mut RngStream::new(504, 0)).unwrap();
    let mut last = 0.0;
    for eps in [0.0, 0.1, 0.2, 0.3, 0.4] {
        let g = two_intervals_ar_grid(&s, eps, 0.005).unwrap();
        assert!(g.length >= last);
        last = g.length;
    }
}

#[test]
fn gaps_below_onset_contribute_nothing() {
    let g = ParabolaGeometry::new(3.0).unwrap();
    assert_eq!(g.nu(g.onset() - 1e-6), 0.0);
    assert!(g.nu(g.onset() + 0.1) > 0.0);
}
