//! Restricted Bergman kernels, restricted equilibrium weights and
//! Monge-Ampère measures on toric curves and surfaces.
//!
//! Torus-invariant weights on a toric variety are convex functions of the
//! log coordinates `t = log|z|²`. Sections of `mL` are monomials indexed by
//! the lattice points of `mP`, so kernels, envelopes and volumes all reduce to
//! computations with convex symbols on `[-T, T]^d`.

pub mod acceptance;
pub mod bergman;
pub mod envelope;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod ma;
pub mod quadrature;
pub mod runner;
pub mod scenario;
pub mod sections;
pub mod volume;

pub use error::{Error, Result};
