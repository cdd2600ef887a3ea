use super::{run_adversary, Adversary, AdversaryReport, AttackOutput, EpsBall, Perturbation};
use crate::classifiers::{CountedOracle, LabelOracle};
use crate::error::{domain, Result};
use crate::label::Label;
use crate::rng::RngStream;

/// Locates a planar decision line by bisection on the columns `x = 0` and
/// `x = m`, assuming -1 below and +1 above the line, then pushes every
/// point within reach perpendicularly across it.
#[derive(Clone, Copy, Debug)]
pub struct LineSearchAdversary {
    pub m: f64,
    pub z: f64,
    pub tol: f64,
    pub eps: f64,
}

impl LineSearchAdversary {
    /// Bisection steps per column: `ceil(log2(z / tol))`.
    pub fn steps(&self) -> u32 {
        (self.z / self.tol).log2().ceil().max(0.0) as u32
    }

    /// Crossing estimate on column `x`, and whether every answer agreed.
    fn bisect(&self, oracle: &mut dyn LabelOracle, x: f64) -> Result<(f64, bool)> {
        let (mut lo, mut hi) = (0.0, self.z);
        let mut seen = [false; 2];
        for _ in 0..self.steps() {
            let mid = 0.5 * (lo + hi);
            match oracle.query(&[x, mid])? {
                Label::Neg => {
                    seen[0] = true;
                    lo = mid;
                }
                Label::Pos => {
                    seen[1] = true;
                    hi = mid;
                }
            }
        }
        Ok((0.5 * (lo + hi), !(seen[0] && seen[1])))
    }
}

impl Adversary for LineSearchAdversary {
    fn attack(&self, oracle: &mut dyn LabelOracle, _: &mut RngStream) -> Result<AttackOutput> {
        if !(self.tol > 0.0 && self.z > 0.0 && self.m > 0.0) {
            return domain("line attack needs positive m, z and tol");
        }
        let bound = EpsBall::uniform(self.eps);
        let (c0, flat0) = self.bisect(oracle, 0.0)?;
        let (c1, flat1) = self.bisect(oracle, self.m)?;
        // a one-sided column is only meaningful when it is pinned to an end
        let pinned = |c: f64| c < self.tol || c > self.z - self.tol;
        if flat0 && flat1 && pinned(c0) && pinned(c1) {
            let mut out = AttackOutput::new(Perturbation::identity(bound));
            out.failure = Some("oracle is constant on both probe columns".into());
            return Ok(out);
        }
        // unit normal of the line through (0, c0) and (m, c1), pointing up
        let (dx, dy) = (self.m, c1 - c0);
        let len = (dx * dx + dy * dy).sqrt();
        let n = [-dy / len, dx / len];
        let eps = self.eps;
        let p = Perturbation::from_fn(bound, move |x| {
            let s = n[0] * x[0] + n[1] * (x[1] - c0);
            if s.abs() >= eps {
                return x.to_vec();
            }
            let dir = if s < 0.0 { 1.0 } else { -1.0 };
            vec![x[0] + dir * eps * n[0], x[1] + dir * eps * n[1]]
        });
        Ok(AttackOutput::new(p))
    }

    fn is_randomized(&self) -> bool {
        false
    }
}

pub fn binary_search_line_attack(
    oracle: &mut CountedOracle<'_>,
    m: f64,
    z: f64,
    tol: f64,
    eps: f64,
) -> Result<AdversaryReport> {
    let mut rng = RngStream::new(0, 0);
    run_adversary(&LineSearchAdversary { m, z, tol, eps }, oracle, &mut rng)
}
