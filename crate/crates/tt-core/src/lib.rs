//! Tensor-train (TT) representations of high-order tensors and linear operators.
//!
//! A TT tensor of order `d` stores one order-3 core per mode; entry
//! `x[i_1, ..., i_d]` is the chain product of the matrix slices
//! `G_1[i_1] * G_2[i_2] * ... * G_d[i_d]`, where core `k` has shape
//! `(r_{k-1}, n_k, r_k)` and the boundary ranks `r_0 = r_d = 1`. Operators
//! carry order-4 cores `(R_{k-1}, m_k, n_k, R_k)` and act mode by mode.
//!
//! Dense data uses a fixed linearization: the *last* index varies fastest
//! (row-major / C order). Core buffers follow the same convention, and the
//! on-disk container format serializes them verbatim, so a file written on
//! one machine reconstructs entry-for-entry on another.

mod container;
mod dense;
mod error;
pub mod linalg;
mod matrix;
mod qtt;
mod tensor;

pub use container::{inspect, load_matrix, load_tensor, save_matrix, save_tensor, ContainerInfo, ContainerKind};
pub use dense::DenseTensor;
pub use error::{Result, TtError};
pub use matrix::TTMatrix;
pub use qtt::{
    prime_factors, qtt_reshape, qtt_reshape_matrix, qtt_unreshape, qtt_unreshape_matrix,
    QttFactorization,
};
pub use tensor::TTTensor;

/// Default entry budget for materializing a TT object densely.
pub const DEFAULT_DENSE_BUDGET: usize = 1 << 24;
