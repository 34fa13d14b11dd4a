//! Cross interpolation of black-box tensors into TT format.
//!
//! The driver samples a tensor only at structured index crosses, alternating
//! left-to-right and right-to-left sweeps that refine the index sets with
//! maxvol row selection on orthogonalized unfoldings. Ranks grow by one per
//! bond after each non-converged sweep; convergence is judged on a random
//! validation set kept disjoint from the interpolation crosses.

mod cross;
mod maxvol;

pub use cross::{cross_interpolate, BlackBox, CrossError, CrossOptions, CrossResult, FnOracle};
pub use maxvol::maxvol;
