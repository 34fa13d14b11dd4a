//! Dense factorization helpers.
//!
//! Tensor data lives in `ndarray` containers; factorizations are delegated to
//! nalgebra, which is pure Rust and needs no external BLAS/LAPACK. Conversion
//! copies are quadratic and disappear next to the cubic factorization cost.
//!
//! nalgebra's bidiagonal SVD mishandles some strongly graded matrices (a
//! rank-deficient triangular factor can come back with `sigma_1 > |A|_F`),
//! so every SVD result is checked against the Frobenius identity and a
//! probe-vector residual, with a one-sided Jacobi SVD as the fallback.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Result, TtError};

/// Singular values below this magnitude are treated as exact zeros.
pub const SIGMA_FLOOR: f64 = 1e-300;

pub fn to_nalgebra(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(a.nrows(), a.ncols(), a.iter().cloned())
}

pub fn from_nalgebra(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Thin QR factorization `a = q r` with `q` of shape `(m, k)`, `k = min(m, n)`.
pub fn qr_thin(a: ArrayView2<'_, f64>) -> (Array2<f64>, Array2<f64>) {
    let qr = to_nalgebra(a).qr();
    let q = qr.q();
    let r = qr.r();
    (from_nalgebra(&q), from_nalgebra(&r))
}

/// Thin LQ factorization `a = l q` with `q` of shape `(k, n)` having
/// orthonormal rows, `k = min(m, n)`.
pub fn lq_thin(a: ArrayView2<'_, f64>) -> (Array2<f64>, Array2<f64>) {
    let at = a.t();
    let (qt, rt) = qr_thin(at);
    (rt.t().as_standard_layout().to_owned(), qt.t().as_standard_layout().to_owned())
}

/// Truncated SVD. Keeps the smallest rank whose discarded tail satisfies
/// `sqrt(sum of discarded sigma^2) <= abs_tol`, clipped to `max_rank` when
/// given. At least one triplet is always kept so that zero matrices stay
/// representable. Returns `(u, sigma, v^T)`.
pub fn svd_trunc(
    a: ArrayView2<'_, f64>,
    abs_tol: f64,
    max_rank: Option<usize>,
) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let (m, n) = (a.nrows(), a.ncols());
    // Tall or wide inputs are reduced by QR first; the SVD then runs on a
    // k-by-k factor, which is much cheaper during rounding sweeps.
    if m > 2 * n {
        let (q, r) = qr_thin(a);
        let (ur, s, vt) = svd_trunc(r.view(), abs_tol, max_rank);
        return (q.dot(&ur), s, vt);
    }
    if n > 2 * m {
        let (l, q) = lq_thin(a);
        let (u, s, vtl) = svd_trunc(l.view(), abs_tol, max_rank);
        return (u, s, vtl.dot(&q));
    }

    let (u, sigma, vt) = checked_svd(a);

    let k = sigma.len();
    let mut rank = k;
    let budget = abs_tol.max(0.0).powi(2);
    let mut tail = 0.0;
    while rank > 1 {
        let s = sigma[rank - 1];
        let next = tail + s * s;
        if s < SIGMA_FLOOR || next <= budget {
            tail = next;
            rank -= 1;
        } else {
            break;
        }
    }
    if let Some(cap) = max_rank {
        rank = rank.min(cap.max(1));
    }

    let ut = Array2::from_shape_fn((m, rank), |(i, j)| u[(i, j)]);
    let st: Vec<f64> = sigma[..rank].to_vec();
    let vtt = Array2::from_shape_fn((rank, n), |(i, j)| vt[(i, j)]);
    (ut, st, vtt)
}

/// Full SVD with descending singular values, verified before use. nalgebra
/// is tried first; if its factorization fails the consistency checks (or
/// does not converge), the slower but unconditionally stable one-sided
/// Jacobi method recomputes it.
fn checked_svd(a: ArrayView2<'_, f64>) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let (m, n) = (a.nrows(), a.ncols());
    let k = m.min(n);
    let fnorm_sq: f64 = a.iter().map(|x| x * x).sum();

    let attempt = to_nalgebra(a).try_svd(true, true, f64::EPSILON, 100 * k.max(10));
    if let Some(svd) = attempt {
        let nu = svd.u.expect("svd requested u");
        let nvt = svd.v_t.expect("svd requested v_t");
        let raw: Vec<f64> = svd.singular_values.iter().cloned().collect();

        // nalgebra does not promise an ordering.
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
        let sigma: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
        let u = Array2::from_shape_fn((m, k), |(i, j)| nu[(i, order[j])]);
        let vt = Array2::from_shape_fn((k, n), |(i, j)| nvt[(order[i], j)]);

        if svd_consistent(a, &u, &sigma, &vt, fnorm_sq) {
            return (u, sigma, vt);
        }
    }
    jacobi_svd(a)
}

/// Cheap validity checks: every singular value finite and nonnegative, the
/// Frobenius identity `sum sigma^2 = |A|_F^2`, and a probe-vector residual
/// `|A x - U S V^T x| <= tol |A|_F |x|` with `tol` a small multiple of
/// machine epsilon. Both run in O(m n) time. The thresholds sit far above
/// an honest backward-stable factorization and far below the failure modes
/// seen in practice (inflated leading values, half-converged rotations).
fn svd_consistent(
    a: ArrayView2<'_, f64>,
    u: &Array2<f64>,
    sigma: &[f64],
    vt: &Array2<f64>,
    fnorm_sq: f64,
) -> bool {
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return false;
    }
    let sum_sq: f64 = sigma.iter().map(|s| s * s).sum();
    let scale = fnorm_sq.max(f64::MIN_POSITIVE);
    if (sum_sq - fnorm_sq).abs() > 1e-10 * scale {
        return false;
    }
    // Deterministic pseudo-random probe.
    let n = a.ncols();
    let x: Vec<f64> = (0..n)
        .map(|j| ((j.wrapping_mul(2654435761) >> 8) % 1000) as f64 / 999.0 - 0.5)
        .collect();
    let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let k = sigma.len();
    let mut svx = vec![0.0; k];
    for i in 0..k {
        let mut acc = 0.0;
        for j in 0..n {
            acc += vt[(i, j)] * x[j];
        }
        svx[i] = sigma[i] * acc;
    }
    let mut worst: f64 = 0.0;
    for r in 0..a.nrows() {
        let mut ax = 0.0;
        for j in 0..n {
            ax += a[(r, j)] * x[j];
        }
        let mut ux = 0.0;
        for i in 0..k {
            ux += u[(r, i)] * svx[i];
        }
        worst = worst.max((ax - ux).abs());
    }
    let dim = a.nrows().max(n) as f64;
    let tol = (4.0 * dim + 32.0) * f64::EPSILON;
    worst <= tol * fnorm_sq.sqrt().max(f64::MIN_POSITIVE) * xnorm
}

/// One-sided Jacobi SVD: rotate column pairs until mutual orthogonality,
/// then read the singular values off as column norms. Quadratically
/// convergent and accurate for tiny singular values, at a few times the
/// cost of the bidiagonal method. Only used when the fast path fails.
fn jacobi_svd(a: ArrayView2<'_, f64>) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let (m, n) = (a.nrows(), a.ncols());
    if m < n {
        // Factor the transpose and swap the roles of u and v.
        let at = a.t().as_standard_layout().to_owned();
        let (ut, s, vtt) = jacobi_svd(at.view());
        return (
            vtt.t().as_standard_layout().to_owned(),
            s,
            ut.t().as_standard_layout().to_owned(),
        );
    }

    let mut w = a.to_owned();
    let mut v = Array2::eye(n);
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    norms = order.iter().map(|&i| norms[i]).collect();
    let u = Array2::from_shape_fn((m, n), |(i, j)| {
        let col = order[j];
        if norms[j] >= SIGMA_FLOOR {
            w[(i, col)] / norms[j]
        } else if i == j {
            1.0
        } else {
            0.0
        }
    });
    let vt = Array2::from_shape_fn((n, n), |(i, j)| v[(j, order[i])]);
    (u, norms, vt)
}

/// Reusable LU factorization with partial pivoting.
pub struct LuFactor {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl LuFactor {
    pub fn new(a: ArrayView2<'_, f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(TtError::ShapeMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        Ok(Self { lu: to_nalgebra(a).lu(), n })
    }

    pub fn solve_vec(&self, b: &[f64]) -> Option<Array1<f64>> {
        if b.len() != self.n {
            return None;
        }
        let rhs = DVector::from_column_slice(b);
        self.lu.solve(&rhs).map(|x| Array1::from_iter(x.iter().cloned()))
    }

    /// Solves `A X = B` column-wise for a dense right-hand side block.
    pub fn solve_mat(&self, b: ArrayView2<'_, f64>) -> Option<Array2<f64>> {
        if b.nrows() != self.n {
            return None;
        }
        let rhs = to_nalgebra(b);
        self.lu.solve(&rhs).map(|x| from_nalgebra(&x))
    }
}

/// Dense direct solve; `None` when the matrix is singular to working precision.
pub fn solve_lu(a: ArrayView2<'_, f64>, b: &[f64]) -> Option<Array1<f64>> {
    LuFactor::new(a).ok()?.solve_vec(b)
}

/// Minimum-norm least-squares solve through the SVD, as a fallback for
/// numerically singular local systems.
pub fn solve_lstsq(a: ArrayView2<'_, f64>, b: &[f64]) -> Array1<f64> {
    let (u, sigma, vt) = checked_svd(a);
    let cutoff = sigma.first().copied().unwrap_or(0.0) * 1e-13;
    let k = sigma.len();
    let mut coeff = vec![0.0; k];
    for i in 0..k {
        if sigma[i] <= cutoff.max(SIGMA_FLOOR) {
            continue;
        }
        let mut acc = 0.0;
        for (r, &br) in b.iter().enumerate() {
            acc += u[(r, i)] * br;
        }
        coeff[i] = acc / sigma[i];
    }
    let n = a.ncols();
    Array1::from_shape_fn(n, |j| (0..k).map(|i| coeff[i] * vt[(i, j)]).sum())
}
