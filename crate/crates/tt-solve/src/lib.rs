//! Rank-adaptive solvers for multilinear systems in tensor-train format.
//!
//! The central routine is [`amen_solve`]: alternating core-wise Galerkin
//! solves over an orthogonal TT basis, enlarged every step by a low-rank
//! approximation of the current residual so that ranks adapt to the
//! solution instead of being fixed a priori. [`als_sweep`] exposes the
//! fixed-rank inner iteration, and [`tt_reciprocal`] wraps the solver to
//! invert a tensor elementwise through a diagonal system.
//!
//! Local (projected) systems are assembled densely and LU-factored while
//! small, and solved matrix-free by Jacobi-preconditioned restarted GMRES
//! once they outgrow the dense cutoff.

mod amen;
mod error;
mod local;
mod sweep;

pub use amen::{als_sweep, amen_solve, residual_norm, tt_reciprocal, SolveOptions, SolveReport};
pub use error::{Result, SolveError};
