use super::{run_adversary, Adversary, AdversaryReport, AttackOutput, Perturbation};
use crate::classifiers::{CapComponent, CapErrorSet, CountedOracle, DirectionSampler, LabelOracle};
use crate::error::{domain, Error, Result};
use crate::geometry::{
    cap_threshold_with, norm, rotation_taking, sample_haar_rotation, scaled, CapModel,
    RotationMatrix, UnitVector,
};
use crate::label::Label;
use crate::rng::RngStream;
use crate::tasks::{GroundTruth, DECISION_RADIUS, OUTER_RADIUS};
use rand::Rng;
use std::sync::Arc;

/// The sphere swap: `1.3 x` inside radius 1.15, `x / 1.3` outside.
/// An involution on the union of the two spheres.
pub fn sphere_swap(x: &[f64]) -> Vec<f64> {
    if norm(x) <= DECISION_RADIUS {
        scaled(x, OUTER_RADIUS)
    } else {
        scaled(x, 1.0 / OUTER_RADIUS)
    }
}

/// What an emulator fabricated, kept for evaluating the attack afterwards.
#[derive(Clone, Debug)]
pub enum EmulationRecord {
    Iid {
        decoys: Vec<CapComponent>,
    },
    General {
        rotation: RotationMatrix,
        frames: Vec<RotationMatrix>,
        swaps: Vec<bool>,
    },
}

impl EmulationRecord {
    /// The error set the inner adversary faced when the real one is `hidden`.
    pub fn emulated_set(&self, hidden: &CapErrorSet) -> CapErrorSet {
        let components = match self {
            EmulationRecord::Iid { decoys } => {
                hidden.components.iter().chain(decoys).cloned().collect()
            }
            EmulationRecord::General {
                rotation,
                frames,
                swaps,
            } => {
                let mut out = Vec::new();
                for (frame, &swap) in frames.iter().zip(swaps) {
                    for c in &hidden.components {
                        let axis = rotation.apply(&frame.apply(c.axis().as_slice()));
                        let axis = UnitVector::new(axis).expect("rotated unit vector");
                        let sign = if swap { c.sign.flip() } else { c.sign };
                        out.push(CapComponent::new(axis, sign, hidden.tau));
                    }
                }
                out
            }
        };
        CapErrorSet::new(components, hidden.delta, hidden.k, hidden.tau)
    }
}

struct DecoyOracle<'o> {
    real: &'o mut dyn LabelOracle,
    decoys: &'o [CapComponent],
    free: u64,
}

impl LabelOracle for DecoyOracle<'_> {
    fn query(&mut self, x: &[f64]) -> Result<Label> {
        let forwarded = self.real.query(x)?;
        if self.decoys.iter().any(|c| c.contains(x)) {
            self.free += 1;
            Ok(GroundTruth::Spheres.label(x).flip())
        } else {
            Ok(forwarded)
        }
    }
}

/// Runs an adversary built for `Caps_k^iid(delta)` against a classifier
/// whose error set is a single `tau(delta / k)` component, by planting
/// `k - 1` decoy components.
pub struct EmulateIid<'a> {
    pub inner: &'a dyn Adversary,
    pub d: usize,
    pub delta: f64,
    pub k: usize,
    pub model: CapModel,
}

impl Adversary for EmulateIid<'_> {
    fn attack(&self, oracle: &mut dyn LabelOracle, rng: &mut RngStream) -> Result<AttackOutput> {
        if self.k == 0 {
            return domain("number of components must be at least 1");
        }
        let tau = cap_threshold_with(self.delta / self.k as f64, self.d, self.model)?;
        let axes: Vec<UnitVector> = (1..self.k)
            .map(|_| UnitVector::random(self.d, rng))
            .collect();
        // the hidden component's sign is drawn but unused, as in the protocol
        let _hidden_sign: bool = rng.random();
        let decoys: Vec<CapComponent> = axes
            .into_iter()
            .map(|a| {
                let sign = if rng.random::<bool>() {
                    Label::Pos
                } else {
                    Label::Neg
                };
                CapComponent::new(a, sign, tau)
            })
            .collect();
        let mut wrapped = DecoyOracle {
            real: oracle,
            decoys: &decoys,
            free: 0,
        };
        let mut out = self.inner.attack(&mut wrapped, rng)?;
        out.free_queries += wrapped.free;
        out.emulation = Some(EmulationRecord::Iid { decoys });
        Ok(out)
    }

    fn is_randomized(&self) -> bool {
        true
    }
}

pub fn emulate_iid(
    oracle: &mut CountedOracle<'_>,
    inner: &dyn Adversary,
    d: usize,
    delta: f64,
    k: usize,
    model: CapModel,
    rng: &mut RngStream,
) -> Result<AdversaryReport> {
    run_adversary(
        &EmulateIid {
            inner,
            d,
            delta,
            k,
            model,
        },
        oracle,
        rng,
    )
}

#[derive(Clone)]
struct Frame {
    rotation: Arc<RotationMatrix>,
    frame: RotationMatrix,
    swap: bool,
}

impl Frame {
    /// `F(x) = M R T x`.
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let t = if self.swap {
            sphere_swap(x)
        } else {
            x.to_vec()
        };
        self.rotation.apply(&self.frame.apply(&t))
    }

    /// `F^{-1}(y) = T R^{-1} M^{-1} y` on the two spheres.
    fn backward(&self, y: &[f64]) -> Vec<f64> {
        let r = self.frame.apply_inverse(&self.rotation.apply_inverse(y));
        if self.swap {
            sphere_swap(&r)
        } else {
            r
        }
    }
}

struct FrameOracle<'o> {
    real: &'o mut dyn LabelOracle,
    frames: &'o [Frame],
}

impl LabelOracle for FrameOracle<'_> {
    fn query(&mut self, x: &[f64]) -> Result<Label> {
        let mut err = false;
        for f in self.frames {
            let xi = f.backward(x);
            let a = self.real.query(&xi)?;
            err |= a != GroundTruth::Spheres.label(&xi);
        }
        let h = GroundTruth::Spheres.label(x);
        Ok(if err { h.flip() } else { h })
    }
}

/// Runs an adversary built for `Caps_k^G(delta)` against a single hidden
/// component: each inner query is answered from `k` real queries at the
/// pulled-back points, and the result is the uniform mixture of the
/// conjugated perturbations on the unit sphere.
pub struct EmulateGeneral<'a> {
    pub inner: &'a dyn Adversary,
    pub g: &'a dyn DirectionSampler,
    pub d: usize,
    pub k: usize,
    /// Test hook: use `M = I` instead of a Haar draw.
    pub identity_rotation: bool,
    /// Test hook: fixed swap choices instead of fair coins.
    pub forced_swaps: Option<Vec<bool>>,
}

impl Adversary for EmulateGeneral<'_> {
    fn attack(&self, oracle: &mut dyn LabelOracle, rng: &mut RngStream) -> Result<AttackOutput> {
        if self.k == 0 {
            return domain("number of components must be at least 1");
        }
        let ys = self.g.sample(self.d, self.k, rng)?;
        if ys.len() != self.k {
            return domain(format!(
                "direction sampler returned {} vectors, expected {}",
                ys.len(),
                self.k
            ));
        }
        let e1 = UnitVector::basis(self.d, 0);
        let frames: Vec<RotationMatrix> = ys.iter().map(|y| rotation_taking(&e1, y)).collect();
        let rotation = Arc::new(if self.identity_rotation {
            RotationMatrix::identity(self.d)
        } else {
            sample_haar_rotation(self.d, rng)
        });
        let swaps: Vec<bool> = match &self.forced_swaps {
            Some(s) if s.len() == self.k => s.clone(),
            Some(s) => {
                return domain(format!(
                    "{} forced swaps for {} components",
                    s.len(),
                    self.k
                ))
            }
            None => (0..self.k).map(|_| rng.random::<bool>()).collect(),
        };
        let maps: Vec<Frame> = frames
            .iter()
            .zip(&swaps)
            .map(|(f, &swap)| Frame {
                rotation: Arc::clone(&rotation),
                frame: f.clone(),
                swap,
            })
            .collect();

        let mut wrapped = FrameOracle {
            real: oracle,
            frames: &maps,
        };
        let inner = self.inner.attack(&mut wrapped, rng)?;
        let p = inner.perturbation;
        if p.apply_deterministic(&vec![0.0; self.d]).is_none() {
            return Err(Error::Unsupported(
                "inner adversary must return a single map".into(),
            ));
        }
        let bound = p.bound();
        let components = maps
            .iter()
            .map(|frame| {
                let frame = frame.clone();
                let p = p.clone();
                Perturbation::from_fn(bound, move |x| {
                    if norm(x) <= DECISION_RADIUS {
                        let moved = p
                            .apply_deterministic(&frame.forward(x))
                            .expect("single map");
                        frame.backward(&moved)
                    } else {
                        x.to_vec()
                    }
                })
            })
            .collect();
        let mut out = AttackOutput::new(Perturbation::mixture(bound, components)?);
        out.failure = inner.failure;
        out.emulation = Some(EmulationRecord::General {
            rotation: (*rotation).clone(),
            frames,
            swaps,
        });
        Ok(out)
    }

    fn is_randomized(&self) -> bool {
        true
    }
}

pub fn emulate_general(
    oracle: &mut CountedOracle<'_>,
    inner: &dyn Adversary,
    g: &dyn DirectionSampler,
    d: usize,
    k: usize,
    rng: &mut RngStream,
) -> Result<AdversaryReport> {
    let adv = EmulateGeneral {
        inner,
        g,
        d,
        k,
        identity_rotation: false,
        forced_swaps: None,
    };
    run_adversary(&adv, oracle, rng)
}
