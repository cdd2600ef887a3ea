//! Vectors, spheres, rotations and spherical caps in `R^d`.
//!
//! Points are plain `Vec<f64>` / `&[f64]`; the helpers below are the small
//! amount of linear algebra the rest of the crate needs.

mod cap;
mod rotation;

pub use cap::{
    cap_fraction, cap_threshold, cap_threshold_with, gaussian_tail_bounds, gaussian_upper_quantile,
    in_cap, CapMinusBall, CapModel, SphericalCap,
};
pub use rotation::{rotation_taking, sample_haar_rotation, RotationMatrix, LAZY_HAAR_THRESHOLD};

use crate::rng::RngStream;
use rand_distr::{Distribution, StandardNormal};

pub type Point = Vec<f64>;

/// A vector with unit Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `v`; returns `None` for a zero or non-finite vector.
    pub fn new(v: Vec<f64>) -> Option<Self> {
        let n = norm(&v);
        if !(n.is_finite() && n > 0.0) {
            return None;
        }
        Some(Self(v.into_iter().map(|c| c / n).collect()))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Self(v)
    }

    pub fn random(d: usize, rng: &mut RngStream) -> Self {
        Self(sample_uniform_sphere(d, 1.0, rng))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn gaussian_vector(d: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniform draw from the sphere of radius `r` in `R^d`.
///
/// Normalized Gaussian vector; an all-zero draw is redrawn.
pub fn sample_uniform_sphere(d: usize, r: f64, rng: &mut RngStream) -> Point {
    assert!(d >= 1, "dimension must be at least 1");
    loop {
        let g = gaussian_vector(d, rng);
        let n = norm(&g);
        if n > 0.0 && n.is_finite() {
            return g.into_iter().map(|c| c * r / n).collect();
        }
    }
}

/// Geodesic step on the sphere through `x`: the point of that sphere that
/// maximizes `<x' - x, v>` subject to `|x' - x| <= chord`.
///
/// Returns `x` unchanged when `v` has no component tangent to the sphere at `x`.
pub fn geodesic_push(x: &[f64], v: &[f64], chord: f64) -> Point {
    let r = norm(x);
    if r == 0.0 || chord <= 0.0 {
        return x.to_vec();
    }
    let xh = scaled(x, 1.0 / r);
    let vx = dot(v, &xh);
    let mut tangent: Vec<f64> = v.to_vec();
    axpy(-vx, &xh, &mut tangent);
    let tn = norm(&tangent);
    let vn = norm(v);
    if vn == 0.0 || tn <= 1e-14 * vn {
        return x.to_vec();
    }
    let max_angle = if chord >= 2.0 * r {
        std::f64::consts::PI
    } else {
        2.0 * (chord / (2.0 * r)).asin()
    };
    // angle between x and v; moving past it would decrease the objective
    let to_v = tn.atan2(vx);
    let phi = max_angle.min(to_v);
    let (s, c) = phi.sin_cos();
    xh.iter()
        .zip(&tangent)
        .map(|(a, t)| r * (c * a + s * t / tn))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_d1_is_two_points() {
        let mut rng = RngStream::new(1, 0);
        let mut plus = 0;
        let n = 4000;
        for _ in 0..n {
            let x = sample_uniform_sphere(1, 1.0, &mut rng);
            assert!(x[0] == 1.0 || x[0] == -1.0);
            if x[0] > 0.0 {
                plus += 1;
            }
        }
        let p = plus as f64 / n as f64;
        assert!((p - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn sphere_radius_is_exact() {
        let mut rng = RngStream::new(2, 0);
        let x = sample_uniform_sphere(3, 1.3, &mut rng);
        assert!((norm(&x) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn sphere_first_coordinate_mean_zero() {
        // <x, e1> has variance 1/d on the unit sphere
        let d = 100;
        let n = 100_000;
        let mut rng = RngStream::new(3, 0);
        let mean: f64 = (0..n)
            .map(|_| sample_uniform_sphere(d, 1.0, &mut rng)[0])
            .sum::<f64>()
            / n as f64;
        let stderr = (1.0 / d as f64 / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * stderr, "mean {mean} stderr {stderr}");
    }

    #[test]
    fn geodesic_push_degenerate_tangent_is_identity() {
        let x = vec![1.0, 0.0, 0.0];
        let v = vec![2.0, 0.0, 0.0];
        assert_eq!(geodesic_push(&x, &v, 0.3), x);
    }

    #[test]
    fn geodesic_push_respects_chord_and_sphere() {
        let mut rng = RngStream::new(4, 0);
        for _ in 0..200 {
            let x = sample_uniform_sphere(10, 1.3, &mut rng);
            let v = gaussian_vector(10, &mut rng);
            let p = geodesic_push(&x, &v, 0.2);
            assert!(distance(&x, &p) <= 0.2 + 1e-12);
            assert!((norm(&p) - 1.3).abs() < 1e-9);
        }
    }

    #[test]
    fn geodesic_push_stops_at_v_direction() {
        // v is within reach: optimum is the point of the sphere along v
        let x = vec![1.0, 0.0];
        let v = vec![1.0, 0.05];
        let p = geodesic_push(&x, &v, 0.5);
        let vh = UnitVector::new(v).unwrap();
        assert!(distance(&p, vh.as_slice()) < 1e-12);
    }
}
