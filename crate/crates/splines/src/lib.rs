//! Univariate B-spline bases on [0, 1]: open (clamped) knot vectors with
//! controlled interior multiplicities, Cox-de Boor evaluation, first
//! derivatives, Greville abscissae, per-span Gauss-Legendre quadrature, and
//! collocation matrices.
//!
//! Everything here is univariate; tensor-product constructions live in the
//! crates that consume this one. Bases are immutable after construction and
//! all evaluations are pure.

mod basis;
mod error;
mod gauss;
mod knots;
mod quadrature;

pub use basis::BSplineBasis;
pub use error::{Result, SplineError};
pub use gauss::gauss_legendre;
pub use knots::KnotVector;
pub use quadrature::QuadratureGrid;

use ndarray::Array2;

/// Collocation matrix `B[m, k] = b_k(points[m])`. Each row has at most
/// `p + 1` nonzeros, so the matrix is banded whenever the points are sorted.
pub fn collocation_matrix(basis: &BSplineBasis, points: &[f64]) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((points.len(), basis.len()));
    for (m, &x) in points.iter().enumerate() {
        let (first, vals) = basis.eval_nonzero(x)?;
        for (j, &v) in vals.iter().enumerate() {
            out[(m, first + j)] = v;
        }
    }
    Ok(out)
}

/// Matrix of first derivatives, `B'[m, k] = b_k'(points[m])`.
pub fn collocation_matrix_deriv(basis: &BSplineBasis, points: &[f64]) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((points.len(), basis.len()));
    for (m, &x) in points.iter().enumerate() {
        let (first, ders) = basis.eval_nonzero_deriv(x)?;
        for (j, &v) in ders.iter().enumerate() {
            out[(m, first + j)] = v;
        }
    }
    Ok(out)
}
