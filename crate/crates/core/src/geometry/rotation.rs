//! Orthogonal maps: Haar-random rotations and rotations taking one unit
//! vector to another.

use super::{axpy, dot, gaussian_vector, norm, UnitVector};
use crate::rng::RngStream;
use rand::Rng;

/// Above this dimension Haar rotations are kept as a product of Householder
/// reflections instead of a dense `d x d` matrix.
pub const LAZY_HAAR_THRESHOLD: usize = 2000;

/// `x -> scale * (x - 2 u <u, x>)` acting on coordinates `offset..`.
#[derive(Clone, Debug, PartialEq)]
struct Reflection {
    offset: usize,
    normal: Vec<f64>,
    scale: f64,
}

impl Reflection {
    fn apply_in_place(&self, x: &mut [f64]) {
        let tail = &mut x[self.offset..];
        let k = 2.0 * dot(&self.normal, tail);
        for (xi, ui) in tail.iter_mut().zip(&self.normal) {
            *xi = self.scale * (*xi - k * ui);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Identity,
    /// Row-major `d x d`.
    Dense(Vec<f64>),
    /// `x -> H_0 H_1 ... H_{n-1} diag(signs) x`.
    Reflections {
        reflections: Vec<Reflection>,
        signs: Option<Vec<f64>>,
    },
}

/// An element of the orthogonal group `O(d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationMatrix {
    dim: usize,
    repr: Repr,
}

impl RotationMatrix {
    pub fn identity(d: usize) -> Self {
        Self {
            dim: d,
            repr: Repr::Identity,
        }
    }

    /// Wraps a row-major matrix. The caller is responsible for orthogonality.
    pub fn from_dense(d: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), d * d);
        Self {
            dim: d,
            repr: Repr::Dense(entries),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.repr, Repr::Identity)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        match &self.repr {
            Repr::Identity => x.to_vec(),
            Repr::Dense(m) => m.chunks_exact(self.dim).map(|row| dot(row, x)).collect(),
            Repr::Reflections { reflections, signs } => {
                let mut y = x.to_vec();
                if let Some(s) = signs {
                    y.iter_mut().zip(s).for_each(|(yi, si)| *yi *= si);
                }
                for h in reflections.iter().rev() {
                    h.apply_in_place(&mut y);
                }
                y
            }
        }
    }

    /// Applies the inverse (the transpose).
    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        match &self.repr {
            Repr::Identity => x.to_vec(),
            Repr::Dense(m) => {
                let d = self.dim;
                let mut y = vec![0.0; d];
                for (row, &xi) in m.chunks_exact(d).zip(x) {
                    axpy(xi, row, &mut y);
                }
                y
            }
            Repr::Reflections { reflections, signs } => {
                // every factor is symmetric and orthogonal
                let mut y = x.to_vec();
                for h in reflections {
                    h.apply_in_place(&mut y);
                }
                if let Some(s) = signs {
                    y.iter_mut().zip(s).for_each(|(yi, si)| *yi *= si);
                }
                y
            }
        }
    }

    /// Row-major dense entries.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let col = self.apply(&e);
            for i in 0..d {
                out[i * d + j] = col[i];
            }
        }
        out
    }
}

/// Haar-distributed element of `O(d)`.
///
/// Up to [`LAZY_HAAR_THRESHOLD`] the matrix is materialized from the
/// Gram-Schmidt orthogonalization of a Gaussian matrix (the Q factor with a
/// positive-diagonal R, which is Haar). Above it, Stewart's product of
/// random Householder reflections is kept unmaterialized.
pub fn sample_haar_rotation(d: usize, rng: &mut RngStream) -> RotationMatrix {
    assert!(d >= 1);
    if d == 1 {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return RotationMatrix::from_dense(1, vec![s]);
    }
    if d <= LAZY_HAAR_THRESHOLD {
        dense_haar(d, rng)
    } else {
        stewart_haar(d, rng)
    }
}

fn dense_haar(d: usize, rng: &mut RngStream) -> RotationMatrix {
    // columns as rows of `q` while orthogonalizing
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(d);
    while q.len() < d {
        let mut v = gaussian_vector(d, rng);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for u in &q {
                let c = dot(u, &v);
                axpy(-c, u, &mut v);
            }
        }
        let n = norm(&v);
        if n < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|c| *c /= n);
        q.push(v);
    }
    let mut entries = vec![0.0; d * d];
    for (j, col) in q.iter().enumerate() {
        for (i, c) in col.iter().enumerate() {
            entries[i * d + j] = *c;
        }
    }
    RotationMatrix::from_dense(d, entries)
}

fn stewart_haar(d: usize, rng: &mut RngStream) -> RotationMatrix {
    let mut reflections = Vec::with_capacity(d - 1);
    for k in 0..d - 1 {
        let mut x = gaussian_vector(d - k, rng);
        let s = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        let xn = norm(&x);
        x[0] += s * xn;
        let un = norm(&x);
        x.iter_mut().for_each(|c| *c /= un);
        reflections.push(Reflection {
            offset: k,
            normal: x,
            scale: -s,
        });
    }
    let mut signs = vec![1.0; d];
    if rng.random::<bool>() {
        signs[d - 1] = -1.0;
    }
    RotationMatrix {
        dim: d,
        repr: Repr::Reflections {
            reflections,
            signs: Some(signs),
        },
    }
}

/// A proper rotation `R` with `R from = to`, built from two Householder
/// reflections (the second fixes `to` and restores `det R = +1`).
///
/// In one dimension the only candidate for `from = -to` is `[-1]`.
pub fn rotation_taking(from: &UnitVector, to: &UnitVector) -> RotationMatrix {
    let d = from.dim();
    assert_eq!(d, to.dim(), "dimension mismatch");
    let diff: Vec<f64> = from
        .as_slice()
        .iter()
        .zip(to.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    let dn = norm(&diff);
    if dn < 1e-15 {
        return RotationMatrix::identity(d);
    }
    let u: Vec<f64> = diff.iter().map(|c| c / dn).collect();
    let first = Reflection {
        offset: 0,
        normal: u,
        scale: 1.0,
    };
    if d == 1 {
        return RotationMatrix {
            dim: 1,
            repr: Repr::Reflections {
                reflections: vec![first],
                signs: None,
            },
        };
    }
    let w = super::cap::orthogonal_unit(to.as_slice());
    let second = Reflection {
        offset: 0,
        normal: w,
        scale: 1.0,
    };
    // applied right to left: first, then second
    RotationMatrix {
        dim: d,
        repr: Repr::Reflections {
            reflections: vec![second, first],
            signs: None,
        },
    }
}
