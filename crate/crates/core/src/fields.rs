//! Degree-0 and degree-1 fields of dense local tensors.
//!
//! A [`LocalTensor`] stores one real value per joint state of its face,
//! row-major over the face's sorted vertices. [`Field0`] holds one tensor
//! per face of a nerve; [`Field1`] holds one tensor per strict pair
//! `(alpha, beta)`, always living on the smaller face `beta`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::nerve::{Face, Nerve, VertexId};

/// Per-vertex state-space cardinalities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    cards: BTreeMap<VertexId, usize>,
}

impl Shape {
    pub fn new(cards: BTreeMap<VertexId, usize>) -> Result<Self> {
        for (&v, &c) in &cards {
            if c < 1 {
                return Err(Error::InvalidCardinality { vertex: v });
            }
        }
        Ok(Shape { cards })
    }

    /// All variables share the same cardinality.
    pub fn uniform(vertices: &[VertexId], cardinality: usize) -> Result<Self> {
        Shape::new(vertices.iter().map(|&v| (v, cardinality)).collect())
    }

    pub fn cardinality(&self, v: VertexId) -> Result<usize> {
        self.cards
            .get(&v)
            .copied()
            .ok_or(Error::UnknownVertex { vertex: v })
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.cards.contains_key(&v)
    }

    /// Per-vertex dimensions of a face, in sorted vertex order.
    pub fn dims(&self, face: &Face) -> Result<Vec<usize>> {
        face.vertices()
            .iter()
            .map(|&v| self.cardinality(v))
            .collect()
    }

    /// Number of joint states of a face.
    pub fn volume(&self, face: &Face) -> Result<usize> {
        let mut n: usize = 1;
        for &v in face.vertices() {
            n = n
                .checked_mul(self.cardinality(v)?)
                .ok_or(Error::StateSpaceTooLarge {
                    size: u128::MAX,
                    cap: usize::MAX,
                })?;
        }
        Ok(n)
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        self.cards.keys().copied().collect()
    }

    pub fn cardinalities(&self) -> &BTreeMap<VertexId, usize> {
        &self.cards
    }

    /// The face of all declared variables.
    pub fn omega(&self) -> Result<Face> {
        Face::new(self.cards.keys().copied())
    }
}

/// Row-major strides for mixed-radix index arithmetic.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// A dense real tensor attached to one face.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTensor {
    face: Face,
    values: Vec<f64>,
}

impl LocalTensor {
    pub fn zeros(face: Face, shape: &Shape) -> Result<Self> {
        let n = shape.volume(&face)?;
        Ok(LocalTensor {
            face,
            values: vec![0.0; n],
        })
    }

    pub fn constant(face: Face, shape: &Shape, value: f64) -> Result<Self> {
        let n = shape.volume(&face)?;
        Ok(LocalTensor {
            face,
            values: vec![value; n],
        })
    }

    pub fn from_values(face: Face, shape: &Shape, values: Vec<f64>) -> Result<Self> {
        let n = shape.volume(&face)?;
        if values.len() != n {
            return Err(Error::TensorLength {
                face: face.key(),
                expected: n,
                got: values.len(),
            });
        }
        Ok(LocalTensor { face, values })
    }

    pub fn face(&self) -> &Face {
        &self.face
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm_slice(&self.values)
    }

    pub fn add_scalar(&mut self, c: f64) {
        for v in &mut self.values {
            *v += c;
        }
    }

    /// Positions of this tensor's vertices inside a superface.
    fn positions_in(&self, sup: &Face) -> Vec<usize> {
        self.face
            .vertices()
            .iter()
            .map(|v| sup.vertices().iter().position(|w| w == v).unwrap())
            .collect()
    }

    /// Pulls the tensor up to a superface `alpha`: the result is constant
    /// along the coordinates of `alpha` not in this tensor's face.
    pub fn extended(&self, alpha: &Face, shape: &Shape) -> Result<LocalTensor> {
        if !alpha.contains(&self.face) {
            return Err(Error::NotASubface {
                sub: self.face.key(),
                sup: alpha.key(),
            });
        }
        if *alpha == self.face {
            return Ok(self.clone());
        }
        let adims = shape.dims(alpha)?;
        let astrides = strides(&adims);
        let bdims = shape.dims(&self.face)?;
        let bstrides = strides(&bdims);
        let positions = self.positions_in(alpha);

        let total: usize = adims.iter().product();
        let mut values = vec![0.0; total];
        for (i, slot) in values.iter_mut().enumerate() {
            let mut bidx = 0;
            for (t, &pos) in positions.iter().enumerate() {
                let coord = (i / astrides[pos]) % adims[pos];
                bidx += coord * bstrides[t];
            }
            *slot = self.values[bidx];
        }
        Ok(LocalTensor {
            face: alpha.clone(),
            values,
        })
    }

    /// Sums the tensor over the coordinates outside `beta`. Total mass is
    /// preserved up to floating-point accumulation.
    pub fn marginalized(&self, beta: &Face, shape: &Shape) -> Result<LocalTensor> {
        if !self.face.contains(beta) {
            return Err(Error::NotASubface {
                sub: beta.key(),
                sup: self.face.key(),
            });
        }
        if *beta == self.face {
            return Ok(self.clone());
        }
        let adims = shape.dims(&self.face)?;
        let astrides = strides(&adims);
        let bdims = shape.dims(beta)?;
        let bstrides = strides(&bdims);
        let positions: Vec<usize> = beta
            .vertices()
            .iter()
            .map(|v| self.face.vertices().iter().position(|w| w == v).unwrap())
            .collect();

        let mut values = vec![0.0; bdims.iter().product()];
        for (i, &v) in self.values.iter().enumerate() {
            let mut bidx = 0;
            for (t, &pos) in positions.iter().enumerate() {
                let coord = (i / astrides[pos]) % adims[pos];
                bidx += coord * bstrides[t];
            }
            values[bidx] += v;
        }
        Ok(LocalTensor {
            face: beta.clone(),
            values,
        })
    }

    /// Local duality bracket: sum of entrywise products.
    pub fn dot(&self, other: &LocalTensor) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::FieldMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }
}

/// Sup norm of a slice; infinite if any entry is non-finite, so divergence
/// is never masked by NaN comparisons.
pub(crate) fn sup_norm_slice(values: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for &v in values {
        if !v.is_finite() {
            return f64::INFINITY;
        }
        let a = v.abs();
        if a > m {
            m = a;
        }
    }
    m
}

/// One tensor per face of the nerve, in the nerve's face order.
#[derive(Clone, Debug, PartialEq)]
pub struct Field0 {
    tensors: Vec<LocalTensor>,
}

impl Field0 {
    pub fn zeros(nerve: &Nerve, shape: &Shape) -> Result<Self> {
        let tensors = nerve
            .faces()
            .iter()
            .map(|f| LocalTensor::zeros(f.clone(), shape))
            .collect::<Result<_>>()?;
        Ok(Field0 { tensors })
    }

    pub fn from_tensors(nerve: &Nerve, tensors: Vec<LocalTensor>) -> Result<Self> {
        if tensors.len() != nerve.face_count() {
            return Err(Error::FieldMismatch {
                expected: nerve.face_count(),
                got: tensors.len(),
            });
        }
        for (f, t) in nerve.faces().iter().zip(&tensors) {
            if t.face() != f {
                return Err(Error::UnknownFace {
                    face: t.face().key(),
                });
            }
        }
        Ok(Field0 { tensors })
    }

    pub fn tensors(&self) -> &[LocalTensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [LocalTensor] {
        &mut self.tensors
    }

    pub fn tensor(&self, i: usize) -> &LocalTensor {
        &self.tensors[i]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    fn check_same_shape(&self, other: &Field0) -> Result<()> {
        if self.tensors.len() != other.tensors.len() {
            return Err(Error::FieldMismatch {
                expected: self.tensors.len(),
                got: other.tensors.len(),
            });
        }
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            if a.len() != b.len() {
                return Err(Error::FieldMismatch {
                    expected: a.len(),
                    got: b.len(),
                });
            }
        }
        Ok(())
    }

    /// Entrywise `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Field0) -> Result<()> {
        self.check_same_shape(x)?;
        for (t, s) in self.tensors.iter_mut().zip(&x.tensors) {
            for (v, w) in t.values_mut().iter_mut().zip(s.values()) {
                *v += a * w;
            }
        }
        Ok(())
    }

    /// Duality pairing: sum of local brackets over all faces.
    pub fn pairing(&self, other: &Field0) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut total = 0.0;
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            total += a.dot(b)?;
        }
        Ok(total)
    }

    pub fn sup_norm(&self) -> f64 {
        self.tensors
            .iter()
            .map(|t| t.sup_norm())
            .fold(0.0, f64::max)
    }
}

/// One tensor per strict pair of the nerve, in pair order. The tensor for
/// `(alpha, beta)` lives on the smaller face `beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field1 {
    tensors: Vec<LocalTensor>,
}

impl Field1 {
    pub fn zeros(nerve: &Nerve, shape: &Shape) -> Result<Self> {
        let tensors = nerve
            .strict_pairs()
            .iter()
            .map(|&(_, b)| LocalTensor::zeros(nerve.face(b).clone(), shape))
            .collect::<Result<_>>()?;
        Ok(Field1 { tensors })
    }

    pub fn from_tensors(nerve: &Nerve, tensors: Vec<LocalTensor>) -> Result<Self> {
        if tensors.len() != nerve.strict_pairs().len() {
            return Err(Error::FieldMismatch {
                expected: nerve.strict_pairs().len(),
                got: tensors.len(),
            });
        }
        for (&(_, b), t) in nerve.strict_pairs().iter().zip(&tensors) {
            if t.face() != nerve.face(b) {
                return Err(Error::UnknownFace {
                    face: t.face().key(),
                });
            }
        }
        Ok(Field1 { tensors })
    }

    pub fn tensors(&self) -> &[LocalTensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [LocalTensor] {
        &mut self.tensors
    }

    pub fn tensor(&self, i: usize) -> &LocalTensor {
        &self.tensors[i]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    fn check_same_shape(&self, other: &Field1) -> Result<()> {
        if self.tensors.len() != other.tensors.len() {
            return Err(Error::FieldMismatch {
                expected: self.tensors.len(),
                got: other.tensors.len(),
            });
        }
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            if a.len() != b.len() {
                return Err(Error::FieldMismatch {
                    expected: a.len(),
                    got: b.len(),
                });
            }
        }
        Ok(())
    }

    pub fn axpy(&mut self, a: f64, x: &Field1) -> Result<()> {
        self.check_same_shape(x)?;
        for (t, s) in self.tensors.iter_mut().zip(&x.tensors) {
            for (v, w) in t.values_mut().iter_mut().zip(s.values()) {
                *v += a * w;
            }
        }
        Ok(())
    }

    pub fn pairing(&self, other: &Field1) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut total = 0.0;
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            total += a.dot(b)?;
        }
        Ok(total)
    }

    pub fn sup_norm(&self) -> f64 {
        self.tensors
            .iter()
            .map(|t| t.sup_norm())
            .fold(0.0, f64::max)
    }
}

/// How far per-face sums may drift from 1 before a field stops being a
/// belief.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// A degree-0 field of local probabilities: entrywise positive, each face
/// summing to 1 within [`NORMALIZATION_TOLERANCE`].
#[derive(Clone, Debug, PartialEq)]
pub struct Belief {
    field: Field0,
}

impl Belief {
    pub fn new(field: Field0) -> Result<Self> {
        for t in field.tensors() {
            let mut sum = 0.0;
            for &v in t.values() {
                if v <= 0.0 || !v.is_finite() {
                    return Err(Error::NonFinite {
                        face: t.face().key(),
                    });
                }
                sum += v;
            }
            let err = (sum - 1.0).abs();
            if err > NORMALIZATION_TOLERANCE {
                return Err(Error::NotNormalized {
                    face: t.face().key(),
                    error: err,
                });
            }
        }
        Ok(Belief { field })
    }

    pub fn field(&self) -> &Field0 {
        &self.field
    }

    pub fn into_field(self) -> Field0 {
        self.field
    }

    pub fn tensors(&self) -> &[LocalTensor] {
        self.field.tensors()
    }
}
