//! The operator toolbox on a fixed nerve and shape.
//!
//! Degree 0 to 1: the differential `d` measures marginal inconsistency of
//! densities; its adjoint divergence `delta` turns degree-1 fluxes into
//! degree-0 energy updates while conserving total energy. The zeta
//! transform accumulates subface potentials into local hamiltonians and
//! Möbius inversion undoes it. The effective energy is a log-sum-exp
//! marginalization of energies; its gradient vanishes exactly on
//! consistent Gibbs densities, and composing it with zeta gives the GBP
//! and Bethe flux functionals.

use crate::error::{Error, Result};
use crate::fields::{Belief, Field0, Field1, LocalTensor, Shape};
use crate::nerve::{Face, Nerve};

/// `ln sum exp(-v)` with min-shift stabilization. Energies are the working
/// representation, so the minimum of `v` dominates the sum.
pub fn log_sum_exp_neg(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !m.is_finite() {
        return f64::NAN;
    }
    let s: f64 = values.iter().map(|&v| (-(v - m)).exp()).sum();
    -m + s.ln()
}

/// Binds the operators to one nerve and one shape.
#[derive(Clone, Copy, Debug)]
pub struct OperatorContext<'a> {
    nerve: &'a Nerve,
    shape: &'a Shape,
}

impl<'a> OperatorContext<'a> {
    /// Fails unless every nerve vertex has a declared cardinality.
    pub fn new(nerve: &'a Nerve, shape: &'a Shape) -> Result<Self> {
        for v in nerve.vertices() {
            if !shape.contains(v) {
                return Err(Error::UnknownVertex { vertex: v });
            }
        }
        Ok(OperatorContext { nerve, shape })
    }

    pub fn nerve(&self) -> &'a Nerve {
        self.nerve
    }

    pub fn shape(&self) -> &'a Shape {
        self.shape
    }

    pub fn zero_field0(&self) -> Result<Field0> {
        Field0::zeros(self.nerve, self.shape)
    }

    pub fn zero_field1(&self) -> Result<Field1> {
        Field1::zeros(self.nerve, self.shape)
    }

    /// Builds a degree-0 field one face at a time.
    pub fn field0_from_fn<F>(&self, mut f: F) -> Result<Field0>
    where
        F: FnMut(&Face, usize) -> Result<Vec<f64>>,
    {
        let tensors = self
            .nerve
            .faces()
            .iter()
            .map(|face| {
                let n = self.shape.volume(face)?;
                LocalTensor::from_values(face.clone(), self.shape, f(face, n)?)
            })
            .collect::<Result<_>>()?;
        Field0::from_tensors(self.nerve, tensors)
    }

    /// Builds a degree-1 field one strict pair at a time; the tensor lives
    /// on the inner face.
    pub fn field1_from_fn<F>(&self, mut f: F) -> Result<Field1>
    where
        F: FnMut(&Face, &Face, usize) -> Result<Vec<f64>>,
    {
        let tensors = self
            .nerve
            .strict_pairs()
            .iter()
            .map(|&(a, b)| {
                let outer = self.nerve.face(a);
                let inner = self.nerve.face(b);
                let n = self.shape.volume(inner)?;
                LocalTensor::from_values(inner.clone(), self.shape, f(outer, inner, n)?)
            })
            .collect::<Result<_>>()?;
        Field1::from_tensors(self.nerve, tensors)
    }

    fn check0(&self, field: &Field0) -> Result<()> {
        if field.len() != self.nerve.face_count() {
            return Err(Error::FieldMismatch {
                expected: self.nerve.face_count(),
                got: field.len(),
            });
        }
        Ok(())
    }

    fn check1(&self, field: &Field1) -> Result<()> {
        if field.len() != self.nerve.strict_pairs().len() {
            return Err(Error::FieldMismatch {
                expected: self.nerve.strict_pairs().len(),
                got: field.len(),
            });
        }
        Ok(())
    }

    /// Differential `d`: `d(lambda)_{alpha beta} = lambda_beta -
    /// marginal(lambda_alpha)`. A density is consistent iff the result is
    /// the zero field.
    pub fn differential(&self, lambda: &Field0) -> Result<Field1> {
        self.check0(lambda)?;
        let tensors = self
            .nerve
            .strict_pairs()
            .iter()
            .map(|&(a, b)| {
                let inner = self.nerve.face(b);
                let mut t = lambda.tensor(b).clone();
                let m = lambda.tensor(a).marginalized(inner, self.shape)?;
                for (v, w) in t.values_mut().iter_mut().zip(m.values()) {
                    *v -= w;
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Field1::from_tensors(self.nerve, tensors)
    }

    /// Divergence `delta`, adjoint of `d`: incoming fluxes minus extended
    /// outgoing fluxes per face. Pairs are accumulated in their stored
    /// order, so results are bit-reproducible.
    pub fn divergence(&self, phi: &Field1) -> Result<Field0> {
        self.check1(phi)?;
        let mut out = self.zero_field0()?;
        for (p, &(a, b)) in self.nerve.strict_pairs().iter().enumerate() {
            let flux = phi.tensor(p);
            {
                let t = &mut out.tensors_mut()[b];
                for (v, w) in t.values_mut().iter_mut().zip(flux.values()) {
                    *v += w;
                }
            }
            let extended = flux.extended(self.nerve.face(a), self.shape)?;
            let t = &mut out.tensors_mut()[a];
            for (v, w) in t.values_mut().iter_mut().zip(extended.values()) {
                *v -= w;
            }
        }
        Ok(out)
    }

    /// Zeta transform: `U_alpha = sum over subfaces beta of u_beta`,
    /// including `beta = alpha`.
    #[allow(clippy::needless_range_loop)]
    pub fn zeta(&self, u: &Field0) -> Result<Field0> {
        self.check0(u)?;
        let n = self.nerve.face_count();
        let mut tensors = Vec::with_capacity(n);
        for a in 0..n {
            let alpha = self.nerve.face(a);
            let mut acc = u.tensor(a).clone();
            for b in 0..n {
                if b != a && self.nerve.includes(a, b) {
                    let e = u.tensor(b).extended(alpha, self.shape)?;
                    for (v, w) in acc.values_mut().iter_mut().zip(e.values()) {
                        *v += w;
                    }
                }
            }
            tensors.push(acc);
        }
        Field0::from_tensors(self.nerve, tensors)
    }

    /// Möbius inversion, the exact inverse of [`zeta`](Self::zeta):
    /// descending recursion `u_alpha = U_alpha - sum over strict subfaces
    /// of u_beta`, smallest faces first.
    #[allow(clippy::needless_range_loop)]
    pub fn mobius(&self, cap_u: &Field0) -> Result<Field0> {
        self.check0(cap_u)?;
        let n = self.nerve.face_count();
        let mut tensors: Vec<Option<LocalTensor>> = vec![None; n];
        // Storage is maximal-first, so reverse order visits subfaces before
        // their superfaces.
        for a in (0..n).rev() {
            let alpha = self.nerve.face(a);
            let mut acc = cap_u.tensor(a).clone();
            for b in (a + 1)..n {
                if self.nerve.includes(a, b) {
                    let sub = tensors[b].as_ref().expect("subface already inverted");
                    let e = sub.extended(alpha, self.shape)?;
                    for (v, w) in acc.values_mut().iter_mut().zip(e.values()) {
                        *v -= w;
                    }
                }
            }
            tensors[a] = Some(acc);
        }
        Field0::from_tensors(
            self.nerve,
            tensors.into_iter().map(Option::unwrap).collect(),
        )
    }

    /// Effective energy: `-ln sum over the fiber of exp(-U_alpha)`,
    /// restricted to each state of the subface.
    pub fn effective_energy(&self, u_alpha: &LocalTensor, beta: &Face) -> Result<LocalTensor> {
        if !u_alpha.face().contains(beta) {
            return Err(Error::NotASubface {
                sub: beta.key(),
                sup: u_alpha.face().key(),
            });
        }
        if u_alpha.face() == beta {
            return Ok(u_alpha.clone());
        }
        let adims = self.shape.dims(u_alpha.face())?;
        let astrides = row_major_strides(&adims);
        let bdims = self.shape.dims(beta)?;
        let bstrides = row_major_strides(&bdims);
        let positions: Vec<usize> = beta
            .vertices()
            .iter()
            .map(|v| {
                u_alpha
                    .face()
                    .vertices()
                    .iter()
                    .position(|w| w == v)
                    .unwrap()
            })
            .collect();
        let bvol: usize = bdims.iter().product();

        let fiber_index = |i: usize| -> usize {
            let mut bidx = 0;
            for (t, &pos) in positions.iter().enumerate() {
                let coord = (i / astrides[pos]) % adims[pos];
                bidx += coord * bstrides[t];
            }
            bidx
        };

        // Min-shift per fiber: the minimum energy carries the largest
        // Gibbs weight.
        let mut mins = vec![f64::INFINITY; bvol];
        for (i, &v) in u_alpha.values().iter().enumerate() {
            let b = fiber_index(i);
            if v < mins[b] {
                mins[b] = v;
            }
        }
        let mut sums = vec![0.0f64; bvol];
        for (i, &v) in u_alpha.values().iter().enumerate() {
            let b = fiber_index(i);
            sums[b] += (-(v - mins[b])).exp();
        }
        let values = mins.iter().zip(&sums).map(|(&m, &s)| m - s.ln()).collect();
        LocalTensor::from_values(beta.clone(), self.shape, values)
    }

    /// Effective energy gradient: `U_beta - effective_energy(U_alpha)` per
    /// strict pair. Vanishes iff the unnormalized Gibbs densities
    /// `exp(-U)` are consistent.
    pub fn energy_gradient(&self, cap_u: &Field0) -> Result<Field1> {
        self.check0(cap_u)?;
        let tensors = self
            .nerve
            .strict_pairs()
            .iter()
            .map(|&(a, b)| {
                let inner = self.nerve.face(b);
                let mut t = cap_u.tensor(b).clone();
                let f = self.effective_energy(cap_u.tensor(a), inner)?;
                for (v, w) in t.values_mut().iter_mut().zip(f.values()) {
                    *v -= w;
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Field1::from_tensors(self.nerve, tensors)
    }

    /// Shifts each hamiltonian so its local Gibbs density sums to 1:
    /// `U_alpha += ln sum exp(-U_alpha)`.
    pub fn normalize_hamiltonians(&self, cap_u: &mut Field0) {
        for t in cap_u.tensors_mut() {
            let lz = log_sum_exp_neg(t.values());
            t.add_scalar(lz);
        }
    }

    /// GBP flux: minus the energy gradient of the normalized hamiltonians
    /// of `u`. Zero exactly when the beliefs of `u` are consistent.
    pub fn gbp_flux(&self, u: &Field0) -> Result<Field1> {
        let mut cap_u = self.zeta(u)?;
        self.normalize_hamiltonians(&mut cap_u);
        let mut grad = self.energy_gradient(&cap_u)?;
        negate1(&mut grad);
        Ok(grad)
    }

    /// Degree-1 Möbius inversion of a flux: the outer face is resummed
    /// over the interval between the pair's faces with Möbius weights,
    /// `mu(phi)_{alpha beta} = sum over alpha' in (beta, alpha] of
    /// mobius(alpha', alpha) * phi_{alpha' beta}`. Inverse of the
    /// corresponding degree-1 zeta transform; identity when the nerve is a
    /// graph.
    pub fn mobius1(&self, phi: &Field1) -> Result<Field1> {
        self.check1(phi)?;
        let n = self.nerve.face_count();
        let tensors = self
            .nerve
            .strict_pairs()
            .iter()
            .map(|&(a, b)| {
                let inner = self.nerve.face(b);
                let mut acc = LocalTensor::zeros(inner.clone(), self.shape)?;
                for mid in 0..n {
                    if mid == b || !self.nerve.includes(a, mid) || !self.nerve.includes(mid, b) {
                        continue;
                    }
                    let w = self.nerve.mobius_coefficient(a, mid) as f64;
                    if w == 0.0 {
                        continue;
                    }
                    let p = self
                        .nerve
                        .pair_position(mid, b)
                        .expect("(mid, b) is a strict pair");
                    for (v, x) in acc.values_mut().iter_mut().zip(phi.tensor(p).values()) {
                        *v += w * x;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Field1::from_tensors(self.nerve, tensors)
    }

    /// Bethe flux: degree-1 Möbius inversion of the unnormalized GBP flux.
    /// The inversion replaces the normalization step: summed into the
    /// divergence, the incoming flux at each face collapses to the
    /// Bethe-number weighting of the raw flux.
    pub fn bethe_flux(&self, u: &Field0) -> Result<Field1> {
        let cap_u = self.zeta(u)?;
        let mut grad = self.energy_gradient(&cap_u)?;
        negate1(&mut grad);
        self.mobius1(&grad)
    }

    /// Local Gibbs beliefs of a potential: `U = zeta(u)`, then per-face
    /// softmax of `-U`. Underflowed entries are clamped to the smallest
    /// positive double so beliefs stay strictly positive.
    pub fn beliefs(&self, u: &Field0) -> Result<Belief> {
        let cap_u = self.zeta(u)?;
        let tensors = cap_u
            .tensors()
            .iter()
            .map(|t| {
                let m = t.values().iter().copied().fold(f64::INFINITY, f64::min);
                let mut w: Vec<f64> = t.values().iter().map(|&v| (-(v - m)).exp()).collect();
                let sum: f64 = w.iter().sum();
                for v in &mut w {
                    *v /= sum;
                    if *v == 0.0 {
                        *v = f64::MIN_POSITIVE;
                    }
                }
                LocalTensor::from_values(t.face().clone(), self.shape, w)
            })
            .collect::<Result<Vec<_>>>()?;
        Belief::new(Field0::from_tensors(self.nerve, tensors)?)
    }
}

fn negate1(field: &mut Field1) {
    for t in field.tensors_mut() {
        for v in t.values_mut() {
            *v = -*v;
        }
    }
}

fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}
