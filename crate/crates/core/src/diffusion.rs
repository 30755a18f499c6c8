//! Discrete-time Euler integrators for the flux diffusions.
//!
//! Both algorithms integrate `du/dt = delta(flux(u))` with a fixed step
//! (the diffusivity). The flux functional is either the GBP flux, with its
//! per-face normalization of hamiltonians, or the Bethe flux weighted by
//! the Bethe numbers. The residual of a run is the sup norm of the flux
//! field, which vanishes exactly at consistent fixed points.

use crate::calculus::OperatorContext;
use crate::error::Result;
use crate::fields::{Belief, Field0, Field1};
use crate::model::Model;

/// Residual size past which a run is declared divergent.
pub const DIVERGENCE_CAP: f64 = 1e8;

/// Default hard-convergence threshold on the flux residual.
pub const DEFAULT_RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Gbp,
    Bethe,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Gbp => "gbp",
            Algorithm::Bethe => "bethe",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "gbp" => Some(Algorithm::Gbp),
            "bethe" => Some(Algorithm::Bethe),
            _ => None,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct DiffusionConfig {
    pub algorithm: Algorithm,
    pub diffusivity: f64,
    pub iterations: usize,
    pub residual_tolerance: f64,
    pub record_trajectory: bool,
}

impl DiffusionConfig {
    pub fn new(algorithm: Algorithm, diffusivity: f64, iterations: usize) -> Self {
        DiffusionConfig {
            algorithm,
            diffusivity,
            iterations,
            residual_tolerance: DEFAULT_RESIDUAL_TOLERANCE,
            record_trajectory: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.diffusivity <= 0.0 || !self.diffusivity.is_finite() {
            return Err(crate::error::Error::InvalidParameter(format!(
                "diffusivity must be positive and finite, got {}",
                self.diffusivity
            )));
        }
        if self.iterations < 1 {
            return Err(crate::error::Error::InvalidParameter(
                "iterations must be at least 1".into(),
            ));
        }
        if self.residual_tolerance <= 0.0 || self.residual_tolerance.is_nan() {
            return Err(crate::error::Error::InvalidParameter(format!(
                "residual tolerance must be positive, got {}",
                self.residual_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DiffusionReport {
    pub algorithm: Algorithm,
    pub iterations_run: usize,
    pub final_potential: Field0,
    pub final_beliefs: Belief,
    pub residual_initial: f64,
    pub residual_final: f64,
    pub decay_ratio: f64,
    pub converged: bool,
    pub diverged: bool,
    pub residual_trace: Vec<f64>,
    /// Potential after 0, 1, ... updates; only filled when
    /// `record_trajectory` is set.
    pub potential_trace: Vec<Field0>,
}

fn flux_of(ctx: &OperatorContext, algorithm: Algorithm, u: &Field0) -> Result<Field1> {
    match algorithm {
        Algorithm::Gbp => ctx.gbp_flux(u),
        Algorithm::Bethe => ctx.bethe_flux(u),
    }
}

/// One GBP Euler step: `u + eps * delta(gbp_flux(u))`. The flux is
/// evaluated once, so the step is exactly linear in the diffusivity.
pub fn step_gbp(ctx: &OperatorContext, u: &Field0, eps: f64) -> Result<Field0> {
    let update = ctx.divergence(&ctx.gbp_flux(u)?)?;
    let mut next = u.clone();
    next.axpy(eps, &update)?;
    Ok(next)
}

/// One Bethe Euler step: `u + eps * delta(bethe_flux(u))`.
pub fn step_bethe(ctx: &OperatorContext, u: &Field0, eps: f64) -> Result<Field0> {
    let update = ctx.divergence(&ctx.bethe_flux(u)?)?;
    let mut next = u.clone();
    next.axpy(eps, &update)?;
    Ok(next)
}

/// Sup norm of the algorithm's flux at `u`; zero exactly at fixed points.
pub fn residual(ctx: &OperatorContext, algorithm: Algorithm, u: &Field0) -> Result<f64> {
    Ok(flux_of(ctx, algorithm, u)?.sup_norm())
}

/// Integrates the chosen diffusion from the model's potential.
///
/// The loop stops early once the residual drops to the tolerance or
/// becomes non-finite or larger than [`DIVERGENCE_CAP`]. A bad flux is
/// never applied, so the returned potential is always finite and the
/// final beliefs are always well defined.
pub fn run(model: &Model, config: &DiffusionConfig) -> Result<DiffusionReport> {
    config.validate()?;
    let ctx = model.context();
    let mut u = model.potential().clone();

    let mut residual_trace = Vec::with_capacity(config.iterations + 1);
    let mut potential_trace = Vec::new();
    if config.record_trajectory {
        potential_trace.push(u.clone());
    }

    let mut flux = flux_of(&ctx, config.algorithm, &u)?;
    let mut res = flux.sup_norm();
    residual_trace.push(res);
    let residual_initial = res;

    let mut converged = res <= config.residual_tolerance;
    let mut diverged = !res.is_finite() || res > DIVERGENCE_CAP;
    let mut iterations_run = 0;

    while !converged && !diverged && iterations_run < config.iterations {
        let update = ctx.divergence(&flux)?;
        u.axpy(config.diffusivity, &update)?;
        iterations_run += 1;
        if config.record_trajectory {
            potential_trace.push(u.clone());
        }

        flux = flux_of(&ctx, config.algorithm, &u)?;
        res = flux.sup_norm();
        residual_trace.push(res);
        if !res.is_finite() || res > DIVERGENCE_CAP {
            diverged = true;
        } else if res <= config.residual_tolerance {
            converged = true;
        }
    }

    let decay_ratio = if residual_initial > 0.0 {
        res / residual_initial
    } else {
        1.0
    };

    Ok(DiffusionReport {
        algorithm: config.algorithm,
        iterations_run,
        final_beliefs: ctx.beliefs(&u)?,
        final_potential: u,
        residual_initial,
        residual_final: res,
        decay_ratio,
        converged,
        diverged,
        residual_trace,
        potential_trace,
    })
}
