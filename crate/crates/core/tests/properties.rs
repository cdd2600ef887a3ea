use proptest::prelude::*;
use qclab::adversaries::{cap_push, EpsBall};
use qclab::estimate::wilson_interval;
use qclab::geometry::{
    cap_fraction, cap_threshold, distance, norm, rotation_taking, sample_haar_rotation,
    sample_uniform_sphere, UnitVector,
};
use qclab::metrics::{success_event, theorem1_lower_bound, ParabolaGeometry, SuccessMode};
use qclab::tasks::{sample_two_intervals_poisson, Dataset};
use qclab::{Estimate, RngStream};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cap_round_trip(delta in 1e-3f64..0.5, d in prop::sample::select(vec![3usize, 50, 500])) {
        let tau = cap_threshold(delta, d).unwrap();
        prop_assert!((cap_fraction(tau, d).unwrap() - delta).abs() < 1e-9);
    }

    #[test]
    fn rotations_compose(seed in any::<u64>(), d in 2usize..30) {
        let mut rng = RngStream::new(seed, 0);
        let a = UnitVector::random(d, &mut rng);
        let b = UnitVector::random(d, &mut rng);
        let c = UnitVector::random(d, &mut rng);
        let ab = rotation_taking(&a, &b);
        let bc = rotation_taking(&b, &c);
        let out = bc.apply(&ab.apply(a.as_slice()));
        prop_assert!(distance(&out, c.as_slice()) < 1e-8);
    }

    #[test]
    fn haar_preserves_norm(seed in any::<u64>(), d in 1usize..40) {
        let mut rng = RngStream::new(seed, 1);
        let m = sample_haar_rotation(d, &mut rng);
        let x = sample_uniform_sphere(d, 1.3, &mut rng);
        prop_assert!((norm(&m.apply(&x)) - 1.3).abs() < 1e-9);
        prop_assert!(distance(&m.apply_inverse(&m.apply(&x)), &x) < 1e-9);
    }

    #[test]
    fn cap_push_is_certified_and_sphere_preserving(seed in any::<u64>(), d in 2usize..50, eps in 0.0f64..0.5) {
        let mut rng = RngStream::new(seed, 2);
        let v = UnitVector::random(d, &mut rng).into_inner();
        let p = cap_push(Some(v), EpsBall::norm_scaled(eps));
        for r in [1.0, 1.3] {
            let x = sample_uniform_sphere(d, r, &mut rng);
            let y = p.apply_deterministic(&x).unwrap();
            prop_assert!(distance(&x, &y) <= r * eps + 1e-9);
            prop_assert!((norm(&y) - r).abs() < 1e-9);
        }
    }

    #[test]
    fn nu_is_bounded_by_gap(z in 0.5f64..10.0, l in 0.0f64..60.0) {
        let g = ParabolaGeometry::new(z).unwrap();
        let v = g.nu(l);
        prop_assert!(v >= 0.0 && v <= l);
        prop_assert!(g.nu(l + 0.01) >= v - 1e-12);
    }

    #[test]
    fn success_is_monotone_in_alpha(p in 0.0f64..1.0, o in 0.0f64..1.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (ep, eo) = (Estimate::exact(p), Estimate::exact(o));
        if success_event(&ep, &eo, hi, SuccessMode::Point) {
            prop_assert!(success_event(&ep, &eo, lo, SuccessMode::Point));
        }
    }

    #[test]
    fn theorem1_decreases_in_probability(p in 0.001f64..1.0, q in 0.001f64..1.0, kappa in 0.0f64..0.9) {
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        prop_assert!(theorem1_lower_bound(lo, kappa).unwrap() >= theorem1_lower_bound(hi, kappa).unwrap());
    }

    #[test]
    fn wilson_contains_point_estimate(hits in 0u64..500, extra in 1u64..500) {
        let n = hits + extra;
        let (lo, hi) = wilson_interval(hits, n, 1.96);
        let p = hits as f64 / n as f64;
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
    }

    #[test]
    fn dataset_csv_round_trips(seed in any::<u64>()) {
        let s = sample_two_intervals_poisson(20.0, 2.0, &mut RngStream::new(seed, 3)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(s.task, buf.as_slice()).unwrap();
        prop_assert_eq!(back.samples, s.samples);
    }
}
