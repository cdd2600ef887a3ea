//! The two synthetic binary classification tasks, their ground truths,
//! samplers and the data measure.

use crate::error::{domain, Error, Result};
use crate::estimate::Estimate;
use crate::geometry::{norm, sample_uniform_sphere, Point};
use crate::label::Label;
use crate::rng::RngStream;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const INNER_RADIUS: f64 = 1.0;
pub const OUTER_RADIUS: f64 = 1.3;
pub const DECISION_RADIUS: f64 = 1.15;

/// Two parallel segments of length `m` at vertical distance `z`:
/// `[0, m] x {0}` carries label -1 and `[0, m] x {z}` carries label +1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoIntervalsTask {
    pub m: f64,
    pub z: f64,
}

impl TwoIntervalsTask {
    pub fn new(m: f64, z: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return domain(format!("interval length must be positive, got {m}"));
        }
        if !(z.is_finite() && z > 0.0) {
            return domain(format!("line separation must be positive, got {z}"));
        }
        Ok(Self { m, z })
    }

    /// Uniform draw from the union of the two segments.
    pub fn sample_point(&self, rng: &mut RngStream) -> Point {
        let x = rng.random::<f64>() * self.m;
        let y = if rng.random::<bool>() { self.z } else { 0.0 };
        vec![x, y]
    }
}

/// Uniform mixture of the unit sphere (label -1) and the sphere of radius
/// 1.3 (label +1) in `R^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentricSpheresTask {
    pub d: usize,
}

impl ConcentricSpheresTask {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return domain(format!("sphere dimension must be at least 2, got {d}"));
        }
        Ok(Self { d })
    }

    pub fn sample_point(&self, rng: &mut RngStream) -> Point {
        let r = if rng.random::<bool>() {
            OUTER_RADIUS
        } else {
            INNER_RADIUS
        };
        sample_uniform_sphere(self.d, r, rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Task {
    TwoIntervals(TwoIntervalsTask),
    ConcentricSpheres(ConcentricSpheresTask),
}

impl Task {
    pub fn dim(&self) -> usize {
        match self {
            Task::TwoIntervals(_) => 2,
            Task::ConcentricSpheres(t) => t.d,
        }
    }

    pub fn ground_truth(&self) -> GroundTruth {
        match self {
            Task::TwoIntervals(t) => GroundTruth::Midline { z: t.z },
            Task::ConcentricSpheres(_) => GroundTruth::Spheres,
        }
    }

    /// One draw from the data distribution (the point only).
    pub fn sample_point(&self, rng: &mut RngStream) -> Point {
        match self {
            Task::TwoIntervals(t) => t.sample_point(rng),
            Task::ConcentricSpheres(t) => t.sample_point(rng),
        }
    }
}

/// The labeling rule `h`, defined on all of `R^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroundTruth {
    /// -1 iff `|x| <= 1.15`.
    Spheres,
    /// -1 iff `y < z / 2`.
    Midline { z: f64 },
}

impl GroundTruth {
    pub fn label(&self, x: &[f64]) -> Label {
        match self {
            GroundTruth::Spheres => {
                if norm(x) <= DECISION_RADIUS {
                    Label::Neg
                } else {
                    Label::Pos
                }
            }
            GroundTruth::Midline { z } => {
                if x[1] < z / 2.0 {
                    Label::Neg
                } else {
                    Label::Pos
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub point: Point,
    pub label: Label,
}

/// A training sample. `extension` holds process points just outside the
/// support window (Poisson sampler only); they are not training points.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub task: Task,
    pub samples: Vec<LabeledSample>,
    pub extension: Vec<LabeledSample>,
}

impl Dataset {
    pub fn new(task: Task, samples: Vec<LabeledSample>) -> Self {
        Self {
            task,
            samples,
            extension: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.iter().map(|s| s.point.as_slice())
    }

    /// Sorted first coordinates of the samples carrying `label`.
    pub fn line_coordinates(&self, label: Label) -> Vec<f64> {
        let mut xs: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.label == label)
            .map(|s| s.point[0])
            .collect();
        xs.sort_by(f64::total_cmp);
        xs
    }

    /// Writes `x0,...,x{d-1},label` with a header and 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let d = self.task.dim();
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        header.push("label".into());
        out.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.point.iter().map(|c| format!("{c:.16e}")).collect();
            row.push(s.label.to_string());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the format written by [`Dataset::write_csv`].
    pub fn read_csv<R: Read>(task: Task, r: R) -> Result<Self> {
        let d = task.dim();
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        let expected: Vec<String> = (0..d)
            .map(|i| format!("x{i}"))
            .chain(std::iter::once("label".to_string()))
            .collect();
        if header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(Error::Config(format!(
                "dataset header must be {}, got {}",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("row {}: {e}", row + 2)))
            };
            let point: Point = (0..d).map(|i| parse(&rec[i])).collect::<Result<_>>()?;
            if point.iter().any(|c| !c.is_finite()) {
                return Err(Error::Numerical(format!(
                    "row {}: non-finite coordinate",
                    row + 2
                )));
            }
            let raw: i8 = rec[d]
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("row {}: {e}", row + 2)))?;
            let label = Label::try_from(raw).map_err(Error::Config)?;
            samples.push(LabeledSample { point, label });
        }
        Ok(Self::new(task, samples))
    }
}

/// Rate-1 Poisson process on `[0, m)` along each line.
///
/// Also returns, per line, the nearest process point left of 0 and the first
/// one at or beyond `m`, flagged in [`Dataset::extension`].
pub fn sample_two_intervals_poisson(m: f64, z: f64, rng: &mut RngStream) -> Result<Dataset> {
    let task = TwoIntervalsTask::new(m, z)?;
    let mut samples = Vec::new();
    let mut extension = Vec::new();
    for (y, label) in [(0.0, Label::Neg), (z, Label::Pos)] {
        let left: f64 = Exp1.sample(rng);
        extension.push(LabeledSample {
            point: vec![-left, y],
            label,
        });
        let mut t: f64 = Exp1.sample(rng);
        while t < m {
            samples.push(LabeledSample {
                point: vec![t, y],
                label,
            });
            let gap: f64 = Exp1.sample(rng);
            t += gap;
        }
        extension.push(LabeledSample {
            point: vec![t, y],
            label,
        });
    }
    Ok(Dataset {
        task: Task::TwoIntervals(task),
        samples,
        extension,
    })
}

/// `count` i.i.d. uniform points on the two segments.
pub fn sample_two_intervals_iid(
    count: usize,
    m: f64,
    z: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    let task = TwoIntervalsTask::new(m, z)?;
    if count == 0 {
        return domain("sample count must be at least 1");
    }
    let truth = GroundTruth::Midline { z };
    let samples = (0..count)
        .map(|_| {
            let point = task.sample_point(rng);
            let label = truth.label(&point);
            LabeledSample { point, label }
        })
        .collect();
    Ok(Dataset::new(Task::TwoIntervals(task), samples))
}

/// `n` i.i.d. draws from the concentric spheres distribution.
pub fn sample_concentric_spheres(d: usize, n: usize, rng: &mut RngStream) -> Result<Dataset> {
    let task = ConcentricSpheresTask::new(d)?;
    if n == 0 {
        return domain("sample count must be at least 1");
    }
    let samples = (0..n)
        .map(|_| {
            let outer = rng.random::<bool>();
            let (r, label) = if outer {
                (OUTER_RADIUS, Label::Pos)
            } else {
                (INNER_RADIUS, Label::Neg)
            };
            LabeledSample {
                point: sample_uniform_sphere(d, r, rng),
                label,
            }
        })
        .collect();
    Ok(Dataset::new(Task::ConcentricSpheres(task), samples))
}

/// Monte Carlo estimate of `mu(A)` for the set given by `membership`.
pub fn measure_of_set<F>(task: &Task, membership: F, n: usize, rng: &mut RngStream) -> Estimate
where
    F: Fn(&[f64]) -> bool,
{
    assert!(n > 0, "sample count must be positive");
    let hits = (0..n)
        .filter(|_| membership(&task.sample_point(rng)))
        .count();
    Estimate::from_counts(hits as u64, n as u64)
}
