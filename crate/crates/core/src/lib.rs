//! Least-squares bubble-enriched finite elements for one-dimensional
//! convection-diffusion-reaction transport.
//!
//! The operator is `eps * u'' + kappa * u' + lambda * u = 0`. Linear elements are
//! enriched with polynomial bubbles `x^k (l - x)` whose coefficients minimise
//! the squared element residual. The bubble coefficients are linear in the
//! element's nodal values, so the enrichment adds no global unknowns.
//!
//! The crate is `no_std` and needs only `alloc`; IO, configuration and the
//! command line live in the `bubblefem` companion crate.
#![no_std]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bench;
pub mod bubble;
pub mod bubble2d;
pub mod error;
pub mod linalg;
pub mod poly;
pub mod problem;
pub mod quadrature;
pub mod steady;
pub mod transient;

pub use error::{Error, Result};
pub use poly::Polynomial;
pub use problem::{
    uniform_mesh, BoundaryCondition, EnrichmentKind, Mesh1D, SolutionField, SteadyProblem,
    TransientProblem, TransportCoefficients,
};
