//! Hybrid shallow-network / finite-difference solver for Poisson equations
//! whose solution jumps across an embedded interface.
//!
//! The solution is split as `u = v + w`. The singular part `v` equals a
//! trained single-hidden-layer network `V` inside the interface and zero
//! outside; `V` is fitted to the jump data on the interface with a
//! Levenberg–Marquardt least-squares trainer. The regular part `w` solves an
//! ordinary Poisson problem on a uniform grid with a fast transform-based
//! direct solver.
//!
//! Modules:
//! - [`geometry`]: level-set and parametric interface descriptions.
//! - [`shallow_net`]: the network and its closed-form derivatives.
//! - [`training`]: jump-residual least squares and the LM optimizer.
//! - [`fast_poisson`]: grids, five/seven-point Laplacian, fast direct solvers.
//! - [`hybrid`]: the three-step pipeline, gradients, error norms.
//! - [`stokes`]: Stokes flow with singular interfacial forces on a MAC grid.
//! - [`expr`]: closed-form expressions with symbolic differentiation.
//! - [`problems`]: manufactured and preset problems.

pub mod convergence;
pub mod error;
pub mod expr;
pub mod fast_poisson;
pub mod geometry;
pub mod hybrid;
pub mod problems;
pub mod shallow_net;
pub mod stokes;
pub mod training;

pub use error::{Error, Result};
