//! Core-wise (local) linear systems.
//!
//! With the solution frames orthonormal on both sides of core `k`, the
//! projected system is
//!
//! ```text
//! H[(a,i,c),(a',i',c')] = L[a,b,a'] A_k[b,i,i',b'] R[c,b',c']
//! F[(a,i,c)]            = Lb[a,g]  B_k[g,i,g']    Rb[c,g']
//! ```
//!
//! where `L`/`R` are the operator interfaces and `Lb`/`Rb` the right-hand
//! side interfaces. Systems up to [`self::DEFAULT_DENSE_CUTOFF`] unknowns
//! are assembled densely and LU-factored; larger ones are solved matrix-free
//! by restarted GMRES with an optional Jacobi (diagonal) preconditioner.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Array3, Array4, ArrayView2};

use crate::error::{Result, SolveError};
use tt_core::linalg::LuFactor;

/// Local systems at most this many unknowns take the dense direct path.
pub const DEFAULT_DENSE_CUTOFF: usize = 700;

/// Matrix product with a C-order result. `ndarray`'s `dot` inherits its
/// output layout from the left operand, and a unit bond can make that
/// operand column-major, which breaks the reshapes these contractions
/// are built from.
pub(crate) fn mm(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    general_mat_mul(1.0, &a, &b, 0.0, &mut out);
    out
}

fn frob3(a: &Array3<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Projected right-hand side `(out_l, n, out_r)` from the two vector
/// interfaces `left (out_l, rb)` and `right (out_r, rb2)`.
pub(crate) fn local_rhs(
    left: &Array2<f64>,
    b_core: &Array3<f64>,
    right: &Array2<f64>,
) -> Array3<f64> {
    let (rb, n, rb2) = b_core.dim();
    let out_l = left.nrows();
    let out_r = right.nrows();
    let b2 = b_core
        .view()
        .into_shape_with_order((rb, n * rb2))
        .expect("contiguous core");
    let t1 = mm(left.view(), b2); // (out_l, n*rb2)
    let t1 = t1
        .into_shape_with_order((out_l * n, rb2))
        .expect("regrouping a contiguous buffer");
    let f = mm(t1.view(), right.t()); // (out_l*n, out_r)
    f.into_shape_with_order((out_l, n, out_r)).expect("sized")
}

/// Applies the projected operator to `v (in_l, n, in_r)`, producing
/// `(out_l, m, out_r)`. `left` is `(out_l, ra, in_l)`, `right` is
/// `(out_r, ra2, in_r)`. Passing mixed interfaces (solution frames on the
/// column side, residual frames on the row side) yields the enrichment and
/// residual projections with the same code path.
pub(crate) fn local_matvec(
    left: &Array3<f64>,
    a_core: &Array4<f64>,
    right: &Array3<f64>,
    v: &Array3<f64>,
) -> Array3<f64> {
    let (out_l, ra, in_l) = left.dim();
    let (_, m, n, ra2) = a_core.dim();
    let (out_r, _, in_r) = right.dim();
    debug_assert_eq!(v.dim(), (in_l, n, in_r));

    // t1[a, b, i', c'] = sum_a' left[a, b, a'] v[a', i', c']
    let l2 = left
        .view()
        .into_shape_with_order((out_l * ra, in_l))
        .expect("contiguous");
    let v2 = v
        .view()
        .into_shape_with_order((in_l, n * in_r))
        .expect("contiguous");
    let t1 = mm(l2, v2); // (out_l*ra, n*in_r)

    // t2[a, c', i, b'] = sum_{b, i'} t1[a, b, i', c'] A[b, i, i', b']
    let t1 = t1
        .into_shape_with_order((out_l, ra, n, in_r))
        .expect("sized")
        .permuted_axes([0, 3, 1, 2])
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((out_l * in_r, ra * n))
        .expect("sized");
    let a_p = a_core
        .view()
        .permuted_axes([0, 2, 1, 3]) // (ra, n, m, ra2)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((ra * n, m * ra2))
        .expect("sized");
    let t2 = mm(t1.view(), a_p.view()); // (out_l*in_r, m*ra2)

    // out[a, i, c] = sum_{b', c'} t2[a, c', i, b'] right[c, b', c']
    let t2 = t2
        .into_shape_with_order((out_l, in_r, m, ra2))
        .expect("sized")
        .permuted_axes([0, 2, 1, 3]) // (out_l, m, in_r, ra2)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((out_l * m, in_r * ra2))
        .expect("sized");
    let r_p = right
        .view()
        .permuted_axes([2, 1, 0]) // (in_r, ra2, out_r)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((in_r * ra2, out_r))
        .expect("sized");
    let out = mm(t2.view(), r_p.view()); // (out_l*m, out_r)
    out.into_shape_with_order((out_l, m, out_r)).expect("sized")
}

/// Assembles the projected operator as a dense `(l*m*r, l*n*r)` matrix.
pub(crate) fn local_matrix(
    left: &Array3<f64>,
    a_core: &Array4<f64>,
    right: &Array3<f64>,
) -> Array2<f64> {
    let (rl, ra, rl2) = left.dim();
    let (_, m, n, ra2) = a_core.dim();
    let (rr, _, rr2) = right.dim();

    // t1[a, a', i, i', b'] = sum_b left[a, b, a'] A[b, i, i', b']
    let l_p = left
        .view()
        .permuted_axes([0, 2, 1]) // (rl, rl2, ra)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((rl * rl2, ra))
        .expect("sized");
    let a2 = a_core
        .view()
        .into_shape_with_order((ra, m * n * ra2))
        .expect("contiguous");
    let t1 = mm(l_p.view(), a2); // (rl*rl2, m*n*ra2)

    // t2[a, a', i, i', c, c'] = sum_b' t1[.., b'] right[c, b', c']
    let t1 = t1
        .into_shape_with_order((rl * rl2 * m * n, ra2))
        .expect("regrouping");
    let r_p = right
        .view()
        .permuted_axes([1, 0, 2]) // (ra2, rr, rr2)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((ra2, rr * rr2))
        .expect("sized");
    let t2 = mm(t1.view(), r_p.view()); // (rl*rl2*m*n, rr*rr2)

    let t2 = t2
        .into_shape_with_order((rl, rl2, m, n, rr, rr2))
        .expect("sized")
        .permuted_axes([0, 2, 4, 1, 3, 5]) // (a, i, c, a', i', c')
        .as_standard_layout()
        .into_owned();
    t2.into_shape_with_order((rl * m * rr, rl2 * n * rr2))
        .expect("sized")
}

/// Diagonal of the projected operator, flattened in `(a, i, c)` order.
pub(crate) fn local_diag(
    left: &Array3<f64>,
    a_core: &Array4<f64>,
    right: &Array3<f64>,
) -> Array1<f64> {
    let (rl, ra, _) = left.dim();
    let (_, m, _, ra2) = a_core.dim();
    let (rr, _, _) = right.dim();
    let dl = Array2::from_shape_fn((rl, ra), |(a, b)| left[[a, b, a]]);
    let da = Array2::from_shape_fn((ra, m * ra2), |(b, ib)| {
        let (i, b2) = (ib / ra2, ib % ra2);
        a_core[[b, i, i, b2]]
    });
    let dr = Array2::from_shape_fn((rr, ra2), |(c, b2)| right[[c, b2, c]]);
    let t1 = mm(dl.view(), da.view()); // (rl, m*ra2)
    let t1 = t1
        .into_shape_with_order((rl * m, ra2))
        .expect("regrouping");
    let diag = mm(t1.view(), dr.t()); // (rl*m, rr)
    Array1::from_iter(diag.iter().cloned())
}

/// Restarted GMRES on the (optionally Jacobi-scaled) system. Returns the
/// solution and the relative preconditioned residual it reached.
fn gmres(
    apply: &dyn Fn(&Array1<f64>) -> Array1<f64>,
    minv: Option<&Array1<f64>>,
    rhs: &Array1<f64>,
    x0: &Array1<f64>,
    tol: f64,
    restart: usize,
    max_restarts: usize,
) -> (Array1<f64>, f64) {
    let prec = |v: &Array1<f64>| -> Array1<f64> {
        match minv {
            Some(m) => v * m,
            None => v.clone(),
        }
    };
    let pb = prec(rhs);
    let bnorm = pb.dot(&pb).sqrt();
    if bnorm == 0.0 {
        return (Array1::zeros(rhs.len()), 0.0);
    }
    let mut x = x0.clone();
    let mut rel = f64::INFINITY;

    for _ in 0..=max_restarts {
        let r = &pb - &prec(&apply(&x));
        let beta = r.dot(&r).sqrt();
        rel = beta / bnorm;
        if rel <= tol {
            return (x, rel);
        }

        let mut v: Vec<Array1<f64>> = vec![&r / beta];
        let mut h = vec![vec![0.0f64; restart]; restart + 1];
        let mut cs = vec![0.0f64; restart];
        let mut sn = vec![0.0f64; restart];
        let mut g = vec![0.0f64; restart + 1];
        g[0] = beta;
        let mut cols = 0usize;

        for j in 0..restart {
            let mut w = prec(&apply(&v[j]));
            // Modified Gram-Schmidt with one re-orthogonalization pass.
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate().take(j + 1) {
                    let c = w.dot(vi);
                    h[i][j] += c;
                    w.scaled_add(-c, vi);
                }
            }
            let wn = w.dot(&w).sqrt();
            h[j + 1][j] = wn;

            // Apply the accumulated Givens rotations to the new column.
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = (h[j][j] * h[j][j] + wn * wn).sqrt();
            if denom == 0.0 {
                cols = j;
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = wn / denom;
            h[j][j] = denom;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            cols = j + 1;

            rel = g[j + 1].abs() / bnorm;
            if wn > 0.0 {
                v.push(&w / wn);
            }
            if rel <= tol || wn == 0.0 {
                break;
            }
        }

        // Back-substitute the triangular system and update the iterate.
        let mut y = vec![0.0f64; cols];
        for i in (0..cols).rev() {
            let mut s = g[i];
            for (jj, yv) in y.iter().enumerate().take(cols).skip(i + 1) {
                s -= h[i][jj] * yv;
            }
            y[i] = s / h[i][i];
        }
        for (i, yv) in y.iter().enumerate() {
            x.scaled_add(*yv, &v[i]);
        }
        if rel <= tol {
            return (x, rel);
        }
    }
    (x, rel)
}

pub(crate) struct LocalSolveParams {
    pub tol: f64,
    pub jacobi: bool,
    pub dense_cutoff: usize,
}

/// Solves the projected system at core `k`, warm-started at `warm`.
/// Returns the solution `(rl, n, rr)` and the relative local residual.
pub(crate) fn solve_local(
    core_index: usize,
    left: &Array3<f64>,
    a_core: &Array4<f64>,
    right: &Array3<f64>,
    rhs: &Array3<f64>,
    warm: &Array3<f64>,
    params: &LocalSolveParams,
) -> Result<(Array3<f64>, f64)> {
    let (rl, n, rr) = rhs.dim();
    let size = rl * n * rr;
    let fnorm = frob3(rhs);

    if size <= params.dense_cutoff {
        let h = local_matrix(left, a_core, right);
        let flat: Vec<f64> = rhs.iter().cloned().collect();
        let lu = LuFactor::new(h.view())?;
        let sol = lu
            .solve_vec(&flat)
            .ok_or(SolveError::LocalSingular { core: core_index })?;
        let u = Array3::from_shape_vec((rl, n, rr), sol.to_vec()).expect("sized");
        // LU only rejects exactly zero pivots; certify the solution so a
        // numerically singular block is reported instead of poisoning x.
        let hu = h.dot(&Array1::from_iter(u.iter().cloned()));
        let mut res = 0.0f64;
        for (a, b) in hu.iter().zip(rhs.iter()) {
            res += (a - b) * (a - b);
        }
        let res = res.sqrt();
        let hscale = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        let uscale = frob3(&u);
        if res > 1e-8 * (hscale * uscale + fnorm) {
            return Err(SolveError::LocalSingular { core: core_index });
        }
        let rel = if fnorm > 0.0 { res / fnorm } else { 0.0 };
        return Ok((u, rel));
    }

    let apply = |v: &Array1<f64>| -> Array1<f64> {
        let v3 = Array3::from_shape_vec((rl, n, rr), v.to_vec()).expect("sized");
        let out = local_matvec(left, a_core, right, &v3);
        Array1::from_iter(out.iter().cloned())
    };
    let minv = if params.jacobi {
        let d = local_diag(left, a_core, right);
        Some(d.mapv(|v| if v.abs() > 1e-280 { 1.0 / v } else { 1.0 }))
    } else {
        None
    };
    let f = Array1::from_iter(rhs.iter().cloned());
    let w = Array1::from_iter(warm.iter().cloned());
    let (sol, rel) = gmres(&apply, minv.as_ref(), &f, &w, params.tol, 40, 5);
    if !rel.is_finite() || rel > 0.5 {
        // Essentially no progress: treat the block as unusable rather than
        // continuing the sweep with garbage.
        return Err(SolveError::LocalSingular { core: core_index });
    }
    let u = Array3::from_shape_vec((rl, n, rr), sol.to_vec()).expect("sized");
    Ok((u, rel))
}
