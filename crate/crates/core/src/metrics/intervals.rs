use crate::error::{domain, Error, Result};
use crate::label::Label;
use crate::tasks::{Dataset, Task, TwoIntervalsTask};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Error-region geometry of 1-NN on the two-intervals task at `eps = z/10`,
/// in the model where each sample competes with the whole opposite line, so
/// that error regions are bounded by parabolas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParabolaGeometry {
    pub z: f64,
    pub alpha_star: f64,
    pub x_star: f64,
}

fn objective(alpha: f64, z: f64) -> f64 {
    z / 10.0 * (-alpha.sin() + 2.0 * 5f64.sqrt() * (5.0 - alpha.cos()).sqrt())
}

/// Minimizes `(z/10)(-sin a + 2 sqrt5 sqrt(5 - cos a))` over `[0, pi/2]` by
/// golden-section search; returns `(alpha*, x*)`.
pub fn solve_alpha_star(z: f64) -> Result<(f64, f64)> {
    if !(z.is_finite() && z > 0.0) {
        return domain(format!("separation must be positive, got {z}"));
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, FRAC_PI_2);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (objective(c, z), objective(d, z));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(c, z);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(d, z);
        }
    }
    let alpha = 0.5 * (a + b);
    let x_star = 5f64.sqrt() * (5.0 - alpha.cos()).sqrt() * z / 5.0;
    Ok((alpha, x_star))
}

impl ParabolaGeometry {
    pub fn new(z: f64) -> Result<Self> {
        let (alpha_star, x_star) = solve_alpha_star(z)?;
        Ok(Self {
            z,
            alpha_star,
            x_star,
        })
    }

    pub fn eps(&self) -> f64 {
        self.z / 10.0
    }

    /// Shortest gap with any reachable error, `4 sqrt5 z / 5`.
    pub fn onset(&self) -> f64 {
        4.0 * 5f64.sqrt() * self.z / 5.0
    }

    /// Gap length where the two branches of `nu` meet, `2 x*`.
    pub fn junction(&self) -> f64 {
        2.0 * self.x_star
    }

    /// Distance from a lone sample beyond which points reach the error
    /// region: `x* - (z/10) sin alpha*`.
    pub fn one_sided_threshold(&self) -> f64 {
        self.x_star - self.eps() * self.alpha_star.sin()
    }

    /// Reachable error length inside a gap of length `l` between two
    /// same-class samples.
    pub fn nu(&self, l: f64) -> f64 {
        let z = self.z;
        let eps = self.eps();
        if l < self.onset() {
            0.0
        } else if l <= self.junction() {
            // eps^2 - h^2 with h the cusp height, factored so it vanishes
            // exactly at the onset
            let h = z / 2.0 - l * l / (8.0 * z);
            let on = self.onset();
            let below = (l - on) * (l + on) / (8.0 * z);
            2.0 * (below * (eps + h)).max(0.0).sqrt()
        } else {
            l - self.junction() + 2.0 * eps * self.alpha_star.sin()
        }
    }

    /// Reachable length in an end interval of length `l` (one neighbour).
    pub fn end_length(&self, l: f64) -> f64 {
        (l - self.one_sided_threshold()).max(0.0)
    }
}

/// Reachable error length on both lines, split into gaps between samples
/// and the two end intervals of each line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalsAr {
    pub gaps: f64,
    pub ends: f64,
    pub length: f64,
    /// `length / 2m`.
    pub fraction: f64,
}

fn two_intervals_of(s: &Dataset) -> Result<TwoIntervalsTask> {
    match s.task {
        Task::TwoIntervals(t) => Ok(t),
        _ => Err(Error::Unsupported(
            "dataset is not from the two-intervals task".into(),
        )),
    }
}

/// Exact adversarial risk of 1-NN in the parabola model, from the gap
/// lengths of `s`. Only `eps = z/10` is covered; use
/// [`two_intervals_ar_grid`] otherwise.
pub fn two_intervals_ar_exact(s: &Dataset, eps: f64) -> Result<IntervalsAr> {
    let task = two_intervals_of(s)?;
    if (eps - task.z / 10.0).abs() > 1e-12 * task.z {
        return domain(format!(
            "closed form needs eps = z/10 = {}, got {eps}",
            task.z / 10.0
        ));
    }
    let geo = ParabolaGeometry::new(task.z)?;
    let (mut gaps, mut ends) = (0.0, 0.0);
    for label in [Label::Neg, Label::Pos] {
        let xs = s.line_coordinates(label);
        let (Some(first), Some(last)) = (xs.first(), xs.last()) else {
            ends += task.m;
            continue;
        };
        gaps += xs.windows(2).map(|w| geo.nu(w[1] - w[0])).sum::<f64>();
        ends += geo.end_length(*first) + geo.end_length(task.m - last);
    }
    let length = gaps + ends;
    Ok(IntervalsAr {
        gaps,
        ends,
        length,
        fraction: length / (2.0 * task.m),
    })
}

/// Neighbours of `t` among sorted `xs`: the last one `<= t` and the first
/// one `> t`.
pub(crate) fn neighbours(xs: &[f64], t: f64) -> (Option<f64>, Option<f64>) {
    let i = xs.partition_point(|&x| x <= t);
    (i.checked_sub(1).map(|j| xs[j]), xs.get(i).copied())
}

/// Whether the point at horizontal position `t` on a line can move within
/// `eps` to a point nearer the opposite line than to its own neighbours
/// `prev`/`next`.
pub fn continuum_reachable(t: f64, prev: Option<f64>, next: Option<f64>, z: f64, eps: f64) -> bool {
    let dist_to = |qx: f64, qy: f64| {
        let a = prev.map_or(f64::INFINITY, |p| (qx - p).hypot(qy));
        let b = next.map_or(f64::INFINITY, |n| (qx - n).hypot(qy));
        a.min(b)
    };
    let here = dist_to(t, 0.0);
    if here > z {
        return true;
    }
    if here <= z - 2.0 * eps {
        return false;
    }
    // the error region is closed upward, so the upper half circle suffices
    let margin = |a: f64| dist_to(t + eps * a.cos(), eps * a.sin()) - (z - eps * a.sin());
    const STEPS: usize = 256;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for i in 0..=STEPS {
        let v = margin(PI * i as f64 / STEPS as f64);
        if v > 0.0 {
            return true;
        }
        if v > best.0 {
            best = (v, i);
        }
    }
    // refine around the best grid angle
    let h = PI / STEPS as f64;
    let (mut lo, mut hi) = (
        (best.1 as f64 * h - h).max(0.0),
        (best.1 as f64 * h + h).min(PI),
    );
    for _ in 0..60 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if margin(a) < margin(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    margin(0.5 * (lo + hi)) > 0.0
}

/// Midpoint quadrature of `pred` over both lines at spacing `step`;
/// returns the covered length. `pred` also receives the cell width.
pub fn line_quadrature<F>(task: &TwoIntervalsTask, step: f64, mut pred: F) -> Result<f64>
where
    F: FnMut(&[f64], f64) -> Result<bool>,
{
    if !(step.is_finite() && step > 0.0) {
        return domain(format!("grid step must be positive, got {step}"));
    }
    let cells = (task.m / step).ceil() as usize;
    let mut length = 0.0;
    for y in [0.0, task.z] {
        for i in 0..cells {
            let lo = i as f64 * step;
            let hi = (lo + step).min(task.m);
            if pred(&[0.5 * (lo + hi), y], hi - lo)? {
                length += hi - lo;
            }
        }
    }
    Ok(length)
}

/// Grid evaluation of the parabola-model adversarial risk for any `eps`.
pub fn two_intervals_ar_grid(s: &Dataset, eps: f64, step: f64) -> Result<IntervalsAr> {
    let task = two_intervals_of(s)?;
    if !(eps >= 0.0) {
        return domain("eps must be non-negative");
    }
    let neg = s.line_coordinates(Label::Neg);
    let pos = s.line_coordinates(Label::Pos);
    let mut gaps = 0.0;
    let length = line_quadrature(&task, step, |x, width| {
        let xs = if x[1] == 0.0 { &neg } else { &pos };
        let (prev, next) = neighbours(xs, x[0]);
        let hit = continuum_reachable(x[0], prev, next, task.z, eps);
        if hit && prev.is_some() && next.is_some() {
            gaps += width;
        }
        Ok(hit)
    })?;
    Ok(IntervalsAr {
        gaps,
        ends: length - gaps,
        length,
        fraction: length / (2.0 * task.m),
    })
}
