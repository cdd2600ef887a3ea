use super::Classifier;
use crate::error::{domain, Error, Result};
use crate::geometry::{distance, Point};
use crate::label::Label;
use crate::tasks::Dataset;

/// 1-nearest-neighbour rule under the Euclidean norm. Ties go to the lowest
/// sample index.
#[derive(Clone, Debug)]
pub struct OneNNClassifier {
    points: Vec<Point>,
    labels: Vec<Label>,
    /// Sample indices sorted by first coordinate (then index).
    order: Vec<usize>,
    keys: Vec<f64>,
}

/// The closest point (within the requested radius) where the rule gives the
/// other label, and its distance.
#[derive(Clone, Debug, PartialEq)]
pub struct Reach {
    pub distance: f64,
    pub target: Point,
}

impl OneNNClassifier {
    pub fn new(points: Vec<Point>, labels: Vec<Label>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("1-NN needs a non-empty training set".into()));
        }
        if points.len() != labels.len() {
            return domain("points and labels differ in length");
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return domain("training points must share a positive dimension");
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
        let keys = order.iter().map(|&i| points[i][0]).collect();
        Ok(Self {
            points,
            labels,
            order,
            keys,
        })
    }

    pub fn from_dataset(s: &Dataset) -> Result<Self> {
        Self::new(
            s.samples.iter().map(|p| p.point.clone()).collect(),
            s.samples.iter().map(|p| p.label).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Index of and distance to the nearest training point.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let x0 = x[0];
        let start = self.keys.partition_point(|&k| k < x0);
        let mut best = (f64::INFINITY, usize::MAX);
        let consider = |i: usize, best: &mut (f64, usize)| {
            let d2: f64 = self.points[i]
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 < best.0 || (d2 == best.0 && i < best.1) {
                *best = (d2, i);
            }
        };
        let mut lo = start;
        let mut hi = start;
        loop {
            let left_open = lo > 0 && (x0 - self.keys[lo - 1]).powi(2) <= best.0;
            let right_open = hi < self.keys.len() && (self.keys[hi] - x0).powi(2) <= best.0;
            if !left_open && !right_open {
                break;
            }
            if left_open {
                lo -= 1;
                consider(self.order[lo], &mut best);
            }
            if right_open {
                consider(self.order[hi], &mut best);
                hi += 1;
            }
        }
        (best.1, best.0.sqrt())
    }

    /// Sample indices whose first coordinate lies in `[lo, hi]`.
    fn in_slab(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        let a = self.keys.partition_point(|&k| k < lo);
        let b = self.keys.partition_point(|&k| k <= hi);
        self.order[a..b].iter().copied()
    }

    /// Closest point within `radius` of `x` whose label differs from
    /// `avoid`, computed exactly from the Voronoi cells (planar data only).
    pub fn reach(&self, x: &[f64], avoid: Label, radius: f64) -> Result<Option<Reach>> {
        if self.dim() != 2 || x.len() != 2 {
            return Err(Error::Unsupported(
                "exact 1-NN reachability is planar only".into(),
            ));
        }
        if self.classify(x) != avoid {
            return Ok(Some(Reach {
                distance: 0.0,
                target: x.to_vec(),
            }));
        }
        // the nearest sample carries `avoid`, so this is finite
        let r_same = self.nearest_with_label(x, avoid);
        let reach_a = r_same + 2.0 * radius;
        let mut best: Option<Reach> = None;
        for ai in self.in_slab(x[0] - reach_a, x[0] + reach_a) {
            if self.labels[ai] == avoid {
                continue;
            }
            let a = &self.points[ai];
            let da = distance(a, x);
            if da > reach_a {
                continue;
            }
            let reach_b = da + 2.0 * radius;
            let mut poly = square(x, radius);
            for bi in self.in_slab(x[0] - reach_b, x[0] + reach_b) {
                if self.labels[bi] != avoid {
                    continue;
                }
                let b = &self.points[bi];
                if distance(b, x) > reach_b {
                    continue;
                }
                // |q - a|^2 <= |q - b|^2
                let n = [2.0 * (b[0] - a[0]), 2.0 * (b[1] - a[1])];
                let c = b[0] * b[0] + b[1] * b[1] - a[0] * a[0] - a[1] * a[1];
                poly = clip(&poly, n, c);
                if poly.len() < 3 {
                    break;
                }
            }
            if poly.len() < 3 {
                continue;
            }
            let (dist, q) = closest_on_polygon(&poly, [x[0], x[1]]);
            if dist > radius || best.as_ref().is_some_and(|r| r.distance <= dist) {
                continue;
            }
            // step from the boundary point towards the cell's interior
            let c = centroid(&poly);
            let gap = ((c[0] - q[0]).powi(2) + (c[1] - q[1]).powi(2)).sqrt();
            let lambda = if gap > 0.0 {
                (0.5 * (radius - dist) / gap).min(0.5)
            } else {
                0.0
            };
            let target = vec![q[0] + lambda * (c[0] - q[0]), q[1] + lambda * (c[1] - q[1])];
            best = Some(Reach {
                distance: dist,
                target,
            });
        }
        Ok(best)
    }

    fn nearest_with_label(&self, x: &[f64], label: Label) -> f64 {
        let x0 = x[0];
        let start = self.keys.partition_point(|&k| k < x0);
        let mut best = f64::INFINITY;
        let mut lo = start;
        let mut hi = start;
        loop {
            let left_open = lo > 0 && (x0 - self.keys[lo - 1]).abs() <= best;
            let right_open = hi < self.keys.len() && (self.keys[hi] - x0).abs() <= best;
            if !left_open && !right_open {
                break;
            }
            if left_open {
                lo -= 1;
                let i = self.order[lo];
                if self.labels[i] == label {
                    best = best.min(distance(&self.points[i], x));
                }
            }
            if right_open {
                let i = self.order[hi];
                if self.labels[i] == label {
                    best = best.min(distance(&self.points[i], x));
                }
                hi += 1;
            }
        }
        best
    }
}

impl Classifier for OneNNClassifier {
    fn classify(&self, x: &[f64]) -> Label {
        self.labels[self.nearest(x).0]
    }
}

pub fn knn_classify(c: &OneNNClassifier, x: &[f64]) -> Label {
    c.classify(x)
}

type P2 = [f64; 2];

fn square(x: &[f64], r: f64) -> Vec<P2> {
    vec![
        [x[0] - r, x[1] - r],
        [x[0] + r, x[1] - r],
        [x[0] + r, x[1] + r],
        [x[0] - r, x[1] + r],
    ]
}

/// Sutherland-Hodgman clip of a convex polygon to `<n, q> <= c`.
fn clip(poly: &[P2], n: P2, c: f64) -> Vec<P2> {
    let f = |p: &P2| n[0] * p[0] + n[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (fp, fq) = (f(&p), f(&q));
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn centroid(poly: &[P2]) -> P2 {
    let n = poly.len() as f64;
    let sx: f64 = poly.iter().map(|p| p[0]).sum();
    let sy: f64 = poly.iter().map(|p| p[1]).sum();
    [sx / n, sy / n]
}

/// Distance from `x` to a convex polygon (counter-clockwise) and the
/// closest point.
fn closest_on_polygon(poly: &[P2], x: P2) -> (f64, P2) {
    let n = poly.len();
    let inside = (0..n).all(|i| {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0]) >= 0.0
    });
    if inside {
        return (0.0, x);
    }
    let mut best = (f64::INFINITY, x);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let e = [q[0] - p[0], q[1] - p[1]];
        let len2 = e[0] * e[0] + e[1] * e[1];
        let t = if len2 > 0.0 {
            (((x[0] - p[0]) * e[0] + (x[1] - p[1]) * e[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let c = [p[0] + t * e[0], p[1] + t * e[1]];
        let d = ((c[0] - x[0]).powi(2) + (c[1] - x[1]).powi(2)).sqrt();
        if d < best.0 {
            best = (d, c);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    fn brute_nearest(points: &[Point], x: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in points.iter().enumerate() {
            let d = distance(p, x);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    #[test]
    fn agrees_with_linear_scan() {
        let mut rng = RngStream::new(31, 0);
        let points: Vec<Point> = (0..20)
            .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 3.0])
            .collect();
        let labels: Vec<Label> = (0..20)
            .map(|i| if i % 3 == 0 { Label::Pos } else { Label::Neg })
            .collect();
        let c = OneNNClassifier::new(points.clone(), labels.clone()).unwrap();
        for _ in 0..1000 {
            let x = [
                rng.random::<f64>() * 12.0 - 1.0,
                rng.random::<f64>() * 5.0 - 1.0,
            ];
            assert_eq!(c.classify(&x), labels[brute_nearest(&points, &x)]);
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let c = OneNNClassifier::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            vec![Label::Pos, Label::Neg],
        )
        .unwrap();
        assert_eq!(c.nearest(&[0.0, 5.0]).0, 0);
        let c = OneNNClassifier::new(
            vec![vec![-1.0, 0.0], vec![1.0, 0.0]],
            vec![Label::Pos, Label::Neg],
        )
        .unwrap();
        assert_eq!(c.nearest(&[0.0, 5.0]).0, 0);
    }

    #[test]
    fn single_point_labels_everything() {
        let c = OneNNClassifier::new(vec![vec![0.0, 0.0]], vec![Label::Pos]).unwrap();
        assert_eq!(c.classify(&[100.0, -3.0]), Label::Pos);
        assert!(OneNNClassifier::new(vec![], vec![]).is_err());
    }

    #[test]
    fn reach_matches_dense_search() {
        let mut rng = RngStream::new(32, 0);
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..15 {
            points.push(vec![rng.random::<f64>() * 10.0, 0.0]);
            labels.push(Label::Neg);
            points.push(vec![rng.random::<f64>() * 10.0, 1.0]);
            labels.push(Label::Pos);
        }
        let c = OneNNClassifier::new(points, labels).unwrap();
        let eps = 0.3;
        for _ in 0..300 {
            let x = [
                rng.random::<f64>() * 10.0,
                if rng.random::<bool>() { 1.0 } else { 0.0 },
            ];
            let avoid = if x[1] > 0.5 { Label::Pos } else { Label::Neg };
            let exact = c.reach(&x, avoid, eps).unwrap();
            // polar grid over the disc
            let mut found = false;
            'outer: for ri in 1..=60 {
                let r = eps * ri as f64 / 60.0;
                for ai in 0..360 {
                    let a = ai as f64 * std::f64::consts::TAU / 360.0;
                    if c.classify(&[x[0] + r * a.cos(), x[1] + r * a.sin()]) != avoid {
                        found = true;
                        break 'outer;
                    }
                }
            }
            if let Some(r) = &exact {
                assert!(distance(&r.target, &x) <= eps + 1e-12);
                assert_ne!(c.classify(&r.target), avoid);
            }
            // the grid can only miss slivers, never invent reachability
            if found {
                assert!(exact.is_some());
            }
        }
    }
}
