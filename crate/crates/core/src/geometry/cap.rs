//! Spherical caps: measure, thresholds, membership and distance.

use super::{dot, norm, UnitVector};
use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

/// Which measure a cap threshold is computed against.
///
/// `Exact` uses the surface measure of the unit sphere. `Gaussian` replaces
/// the uniform sphere by `N(0, 1/d)^d`, so `sqrt(d) * tau` is a normal
/// quantile independent of `d`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapModel {
    #[default]
    Exact,
    Gaussian,
}

/// Fraction of the unit sphere `S^{d-1}` with `<x, e1> >= tau`.
pub fn cap_fraction(tau: f64, d: usize) -> Result<f64> {
    if !(-1.0..=1.0).contains(&tau) {
        return domain(format!("cap threshold {tau} outside [-1, 1]"));
    }
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    if d == 1 {
        // S^0 = {-1, +1}, each with mass 1/2
        return Ok(if tau <= -1.0 { 1.0 } else { 0.5 });
    }
    if tau < 0.0 {
        return Ok(1.0 - upper_cap(-tau, d));
    }
    Ok(upper_cap(tau, d))
}

// tau in [0, 1]: half of the regularized incomplete beta I_{1-tau^2}((d-1)/2, 1/2)
fn upper_cap(tau: f64, d: usize) -> f64 {
    if tau >= 1.0 {
        return 0.0;
    }
    let x = 1.0 - tau * tau;
    0.5 * beta_reg((d as f64 - 1.0) / 2.0, 0.5, x)
}

/// Threshold `tau` with `cap_fraction(tau, d) == delta` under the exact model.
pub fn cap_threshold(delta: f64, d: usize) -> Result<f64> {
    cap_threshold_with(delta, d, CapModel::Exact)
}

pub fn cap_threshold_with(delta: f64, d: usize, model: CapModel) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("cap fraction {delta} outside (0, 1)"));
    }
    if d < 2 {
        return domain("cap threshold needs d >= 2");
    }
    match model {
        CapModel::Exact => {
            if delta > 0.5 {
                return Ok(-cap_threshold_with(1.0 - delta, d, model)?);
            }
            // fraction is decreasing in tau on [0, 1]
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if upper_cap(mid, d) > delta {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            Ok(0.5 * (lo + hi))
        }
        CapModel::Gaussian => Ok(gaussian_upper_quantile(delta)? / (d as f64).sqrt()),
    }
}

/// `q` with `P[N(0,1) >= q] = delta`, by bisection on the complementary
/// error function.
pub fn gaussian_upper_quantile(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("tail probability {delta} outside (0, 1)"));
    }
    let tail = |q: f64| 0.5 * erfc(q / std::f64::consts::SQRT_2);
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mills-ratio bounds on the standard normal upper tail `P[X >= t]`:
/// `phi(t) (1/t - 1/t^3) <= tail <= phi(t) / t`.
///
/// The lower bound is negative for `t < 1`; both are infinite at `t = 0`.
pub fn gaussian_tail_bounds(t: f64) -> (f64, f64) {
    let phi = (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let lower = phi * (1.0 / t - 1.0 / (t * t * t));
    let upper = phi / t;
    (lower, upper)
}

/// `cap(y, r, tau) = B_r ∩ {x : <x, y> >= tau}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalCap {
    pub axis: UnitVector,
    pub sphere_radius: f64,
    pub threshold: f64,
}

impl SphericalCap {
    pub fn new(axis: UnitVector, sphere_radius: f64, threshold: f64) -> Result<Self> {
        if !(sphere_radius > 0.0) {
            return domain("cap radius must be positive");
        }
        if !(0.0..=sphere_radius).contains(&threshold) {
            return domain(format!(
                "cap threshold {threshold} outside [0, {sphere_radius}]"
            ));
        }
        Ok(Self {
            axis,
            sphere_radius,
            threshold,
        })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        in_cap(x, self)
    }
}

pub fn in_cap(x: &[f64], cap: &SphericalCap) -> bool {
    norm(x) <= cap.sphere_radius && dot(x, cap.axis.as_slice()) >= cap.threshold
}

/// `cap(y, r_out, tau) \ B_{r_in}`: the shape of one error-set component.
///
/// Membership: `r_in < |x| <= r_out` and `<x, y> >= tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapMinusBall {
    pub axis: UnitVector,
    pub outer_radius: f64,
    pub threshold: f64,
    pub inner_radius: f64,
}

impl CapMinusBall {
    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        r <= self.outer_radius
            && r > self.inner_radius
            && dot(x, self.axis.as_slice()) >= self.threshold
    }

    /// Euclidean distance from `x` to the closure of the set together with a
    /// nearest point, or `None` if the set is empty.
    ///
    /// The set is symmetric about its axis, so the problem reduces to the
    /// meridian half-plane through `x`: coordinates `(s, t)` with `s` along
    /// the axis and `t >= 0` orthogonal to it.
    pub fn nearest_point(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let (r_in, r_out, tau) = (self.inner_radius, self.outer_radius, self.threshold);
        if tau > r_out || r_in >= r_out {
            return None;
        }
        let y = self.axis.as_slice();
        let a = dot(x, y);
        let mut perp: Vec<f64> = x.to_vec();
        super::axpy(-a, y, &mut perp);
        let b = norm(&perp);
        let e = if b > 1e-300 {
            super::scaled(&perp, 1.0 / b)
        } else {
            orthogonal_unit(y)
        };

        let (s, t) = nearest_in_meridian(a, b, r_in, r_out, tau);
        let dist = ((s - a).powi(2) + (t - b).powi(2)).sqrt();
        let point: Vec<f64> = y.iter().zip(&e).map(|(yi, ei)| s * yi + t * ei).collect();
        Some((dist, point))
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.nearest_point(x).map_or(f64::INFINITY, |(d, _)| d)
    }

    /// Every constraint tightened by `margin`, so that the closure of the
    /// result lies inside this set.
    pub fn shrunk(&self, margin: f64) -> Self {
        Self {
            axis: self.axis.clone(),
            outer_radius: self.outer_radius - margin,
            threshold: self.threshold + margin,
            inner_radius: self.inner_radius + margin,
        }
    }

    /// Same shape scaled by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            axis: self.axis.clone(),
            outer_radius: self.outer_radius * factor,
            threshold: self.threshold * factor,
            inner_radius: self.inner_radius * factor,
        }
    }
}

/// Closest point of `{(s, t) : t >= 0, s >= tau, r_in <= |(s,t)| <= r_out}`
/// to `(a, b)` with `b >= 0`. Assumes the region is non-empty.
fn nearest_in_meridian(a: f64, b: f64, r_in: f64, r_out: f64, tau: f64) -> (f64, f64) {
    let rho = (a * a + b * b).sqrt();
    if a >= tau && rho >= r_in && rho <= r_out {
        return (a, b);
    }
    let mut best = (f64::INFINITY, (0.0, 0.0));
    let mut consider = |s: f64, t: f64| {
        let d2 = (s - a).powi(2) + (t - b).powi(2);
        if d2 < best.0 {
            best = (d2, (s, t));
        }
    };

    // segment of the line s = tau inside the annulus
    let t_lo = (r_in * r_in - tau * tau).max(0.0).sqrt();
    let t_hi = (r_out * r_out - tau * tau).max(0.0).sqrt();
    consider(tau, b.clamp(t_lo, t_hi));

    // radial projections on both arcs, valid where s >= tau
    if rho > 0.0 {
        for r in [r_in, r_out] {
            let (s, t) = (a * r / rho, b * r / rho);
            if s >= tau {
                consider(s, t);
            }
        }
    }
    // arc endpoints on the axis side (t = 0)
    if r_in >= tau {
        consider(r_in, 0.0);
    }
    consider(r_out, 0.0);
    best.1
}

pub(super) fn orthogonal_unit(y: &[f64]) -> Vec<f64> {
    let d = y.len();
    if d == 1 {
        return vec![0.0];
    }
    let j = (0..d)
        .min_by(|&i, &k| y[i].abs().total_cmp(&y[k].abs()))
        .unwrap_or(0);
    let mut e = vec![0.0; d];
    e[j] = 1.0;
    super::axpy(-y[j], y, &mut e);
    let n = norm(&e);
    e.iter().map(|c| c / n).collect()
}
