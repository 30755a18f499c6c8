//! Brute-force exact computations on the global state space.
//!
//! Everything here enumerates all joint states, so it is gated by a hard
//! cap on the state-space size. It exists as ground truth for tests and
//! for the `oracle` CLI subcommand, not as a production inference path.

use crate::calculus::{log_sum_exp_neg, OperatorContext};
use crate::error::{Error, Result};
use crate::fields::{Belief, Field0, LocalTensor};
use crate::nerve::Face;

/// Default cap on the number of global states.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

/// The normalized Gibbs density on the global state space.
#[derive(Clone, Debug)]
pub struct GlobalDensity {
    omega: Face,
    values: Vec<f64>,
}

impl GlobalDensity {
    pub fn omega(&self) -> &Face {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Exact computations bound to one context, with a configurable state cap.
#[derive(Clone, Copy, Debug)]
pub struct Oracle<'a> {
    ctx: OperatorContext<'a>,
    cap: usize,
}

impl<'a> Oracle<'a> {
    pub fn new(ctx: OperatorContext<'a>) -> Self {
        Oracle {
            ctx,
            cap: DEFAULT_STATE_CAP,
        }
    }

    pub fn with_cap(ctx: OperatorContext<'a>, cap: usize) -> Self {
        Oracle { ctx, cap }
    }

    /// The global face and its state count, after the cap check.
    fn global_face(&self) -> Result<(Face, usize)> {
        let omega = self.ctx.shape().omega()?;
        let mut size: u128 = 1;
        for &v in omega.vertices() {
            size *= self.ctx.shape().cardinality(v)? as u128;
            if size > self.cap as u128 {
                return Err(Error::StateSpaceTooLarge {
                    size,
                    cap: self.cap,
                });
            }
        }
        Ok((omega, size as usize))
    }

    /// Pointwise sum of all extended local potentials on the global state
    /// space.
    pub fn total_hamiltonian(&self, u: &Field0) -> Result<LocalTensor> {
        let (omega, size) = self.global_face()?;
        let mut h = LocalTensor::from_values(omega.clone(), self.ctx.shape(), vec![0.0; size])?;
        for t in u.tensors() {
            let e = t.extended(&omega, self.ctx.shape())?;
            for (v, w) in h.values_mut().iter_mut().zip(e.values()) {
                *v += w;
            }
        }
        Ok(h)
    }

    /// `ln Z` of the Gibbs density `exp(-H)`, via stabilized log-sum-exp.
    pub fn log_partition(&self, u: &Field0) -> Result<f64> {
        let h = self.total_hamiltonian(u)?;
        Ok(log_sum_exp_neg(h.values()))
    }

    /// Free energy `-ln Z`.
    pub fn free_energy(&self, u: &Field0) -> Result<f64> {
        Ok(-self.log_partition(u)?)
    }

    /// The normalized global Gibbs density of the potential.
    pub fn gibbs_density(&self, u: &Field0) -> Result<GlobalDensity> {
        let h = self.total_hamiltonian(u)?;
        let m = h.values().iter().copied().fold(f64::INFINITY, f64::min);
        let mut values: Vec<f64> = h.values().iter().map(|&v| (-(v - m)).exp()).collect();
        let sum: f64 = values.iter().sum();
        for v in &mut values {
            *v /= sum;
        }
        Ok(GlobalDensity {
            omega: h.face().clone(),
            values,
        })
    }

    /// True marginals: normalize the global density, then sum it down to
    /// every face. Consistent by construction.
    pub fn true_marginals(&self, u: &Field0) -> Result<Belief> {
        let density = self.gibbs_density(u)?;
        let global =
            LocalTensor::from_values(density.omega.clone(), self.ctx.shape(), density.values)?;
        let tensors = self
            .ctx
            .nerve()
            .faces()
            .iter()
            .map(|f| {
                let mut m = global.marginalized(f, self.ctx.shape())?;
                for v in m.values_mut() {
                    if *v == 0.0 {
                        *v = f64::MIN_POSITIVE;
                    }
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Belief::new(Field0::from_tensors(self.ctx.nerve(), tensors)?)
    }
}
