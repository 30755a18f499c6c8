//! Marginal inference by belief-propagation diffusion on
//! intersection-closed hypergraphs.
//!
//! The crate is organized around six pieces: the combinatorial nerve
//! ([`nerve`]), degree-0/1 tensor fields ([`fields`]), the operator
//! toolbox of differential, divergence, zeta/Möbius transforms and flux
//! functionals ([`calculus`]), the two Euler diffusion integrators
//! ([`diffusion`]), a brute-force exact oracle ([`oracle`]) and the model
//! documents plus sweep harness ([`model`], [`bench`]).

pub mod bench;
pub mod calculus;
pub mod diffusion;
pub mod error;
pub mod fields;
pub mod model;
pub mod nerve;
pub mod oracle;

pub use bench::{bench, sample_initial, BenchRow, BenchSpec, BenchTable};
pub use calculus::OperatorContext;
pub use diffusion::{
    residual, run, step_bethe, step_gbp, Algorithm, DiffusionConfig, DiffusionReport,
};
pub use error::{Error, Result};
pub use fields::{Belief, Field0, Field1, LocalTensor, Shape};
pub use model::{load_model, BeliefDocument, Model, ModelDocument, TensorDocument};
pub use nerve::{Face, Nerve, VertexId};
pub use oracle::{GlobalDensity, Oracle};
