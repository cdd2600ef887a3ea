//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use qclab::adversaries::Perturbation;
use qclab::classifiers::CapErrorSet;
use qclab::geometry::sample_uniform_sphere;
use qclab::{Label, RngStream};
use rand::Rng;
use std::io::Write;

pub const DECISION: f64 = 1.15;

/// Writes a verdict line straight to stderr so it shows without
/// `--nocapture`, and fails the test unless the criterion is listed as
/// unattainable at its stated tolerance.
pub fn verdict(id: &str, pass: bool, detail: &str, known_unattainable: bool) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let note = if !pass && known_unattainable {
        " (unattainable as stated; see ledger)"
    } else {
        ""
    };
    let _ = writeln!(std::io::stderr(), "{tag} criterion {id}: {detail}{note}");
    assert!(
        pass || known_unattainable,
        "criterion {id} failed: {detail}"
    );
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point of the spheres task with its label: inner sphere -1, outer +1.
pub fn sphere_point(d: usize, rng: &mut RngStream) -> (Vec<f64>, Label) {
    if rng.random::<bool>() {
        (sample_uniform_sphere(d, 1.3, rng), Label::Pos)
    } else {
        (sample_uniform_sphere(d, 1.0, rng), Label::Neg)
    }
}

/// Whether `y` is an error of the implanted classifier whose label differs
/// from `label`, written out from the component definitions: sign -1 is
/// `{1.15/1.3 < |y| <= 1.15, <y,a> >= tau}`, sign +1 the same scaled by 1.3.
pub fn cap_error_hit(e: &CapErrorSet, y: &[f64], label: Label) -> bool {
    let r = norm(y);
    e.components.iter().any(|c| {
        if c.sign != label {
            return false;
        }
        let s = if c.sign == Label::Neg { 1.0 } else { 1.3 };
        r > s * DECISION / 1.3 && r <= s * DECISION && dot(y, c.axis().as_slice()) >= s * e.tau
    })
}

/// Monte Carlo `mu(p^-1(E))` with label-matched hits; also returns the same
/// mass conditioned on the sphere that carries the first component.
pub fn pulled_mass(
    e: &CapErrorSet,
    p: &Perturbation,
    d: usize,
    n: usize,
    rng: &mut RngStream,
) -> (f64, f64) {
    let home = e.components[0].sign;
    let (mut hits, mut home_hits, mut home_n) = (0usize, 0usize, 0usize);
    for _ in 0..n {
        let (x, label) = sphere_point(d, rng);
        let y = p.apply(&x, rng);
        let hit = cap_error_hit(e, &y, label);
        hits += hit as usize;
        if label == home {
            home_n += 1;
            home_hits += hit as usize;
        }
    }
    (
        hits as f64 / n as f64,
        home_hits as f64 / home_n.max(1) as f64,
    )
}

/// Upper tail of the standard normal by bisection on `0.5 erfc(x / sqrt 2)`.
pub fn normal_upper_quantile(p: f64) -> f64 {
    let tail = |x: f64| 0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2);
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
