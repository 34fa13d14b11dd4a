//! Interface contractions and the left-to-right solving half-sweep.
//!
//! A backward half-sweep is the forward one applied to the reversed TT
//! chains (core order flipped, rank axes swapped), which represents the
//! same tensor; this keeps a single implementation of the delicate
//! enrichment bookkeeping.

use ndarray::{concatenate, s, Array2, Array3, Array4, Axis};

use crate::error::Result;
use crate::local::{local_matvec, local_rhs, mm, solve_local, LocalSolveParams};
use crate::SolveOptions;
use tt_core::linalg::{lq_thin, qr_thin, svd_trunc};
use tt_core::{TTMatrix, TTTensor};

pub(crate) fn reverse_tensor(t: &TTTensor) -> TTTensor {
    let cores = t
        .cores()
        .iter()
        .rev()
        .map(|c| {
            c.view()
                .permuted_axes([2, 1, 0])
                .as_standard_layout()
                .into_owned()
        })
        .collect();
    TTTensor::new(cores).expect("reversal preserves validity")
}

pub(crate) fn reverse_matrix(a: &TTMatrix) -> TTMatrix {
    let cores = a
        .cores()
        .iter()
        .rev()
        .map(|c| {
            c.view()
                .permuted_axes([3, 1, 2, 0])
                .as_standard_layout()
                .into_owned()
        })
        .collect();
    TTMatrix::new(cores).expect("reversal preserves validity")
}

/// Makes cores `1..d` right-orthogonal (orthonormal rows of the `(r, n*r')`
/// flattening), pushing all weight into core 0. Ranks can only shrink.
pub(crate) fn right_orthogonalize(t: &mut TTTensor) {
    let d = t.ndim();
    for k in (1..d).rev() {
        let (r, n, r2) = t.core(k).dim();
        let m = t
            .core(k)
            .view()
            .into_shape_with_order((r, n * r2))
            .expect("contiguous core")
            .to_owned();
        let (l, q) = lq_thin(m.view());
        let rq = q.nrows();
        *t.core_mut(k) = q.into_shape_with_order((rq, n, r2)).expect("sized");
        let (rp, np, _) = t.core(k - 1).dim();
        let prev = mm(
            t.core(k - 1)
                .view()
                .into_shape_with_order((rp * np, r))
                .expect("contiguous core"),
            l.view(),
        );
        *t.core_mut(k - 1) = prev.into_shape_with_order((rp, np, rq)).expect("sized");
    }
}

/// Promotes an operator interface across one mode, left to right:
/// `prev (rr, ra, rx)` at bond `k` becomes `(rr', ra', rx')` at bond `k+1`.
/// `row_core` supplies the test frame (its mode hits the operator row
/// index), `col_core` the solution side.
pub(crate) fn promote_op_left(
    prev: &Array3<f64>,
    row_core: &Array3<f64>,
    a_core: &Array4<f64>,
    col_core: &Array3<f64>,
) -> Array3<f64> {
    let (rr, ra, rx) = prev.dim();
    let (_, m, rr2) = row_core.dim();
    let (_, _, n, ra2) = a_core.dim();
    let (_, _, rx2) = col_core.dim();

    // t1[r, b, j, x'] = sum_x prev[r, b, x] col[x, j, x']
    let p2 = prev
        .view()
        .into_shape_with_order((rr * ra, rx))
        .expect("contiguous");
    let c2 = col_core
        .view()
        .into_shape_with_order((rx, n * rx2))
        .expect("contiguous");
    let t1 = mm(p2, c2);

    // t2[r, x', i, b'] = sum_{b, j} t1[r, b, j, x'] A[b, i, j, b']
    let t1 = t1
        .into_shape_with_order((rr, ra, n, rx2))
        .expect("sized")
        .permuted_axes([0, 3, 1, 2])
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((rr * rx2, ra * n))
        .expect("sized");
    let a_p = a_core
        .view()
        .permuted_axes([0, 2, 1, 3]) // (ra, n, m, ra2)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((ra * n, m * ra2))
        .expect("sized");
    let t2 = mm(t1.view(), a_p.view());

    // out[r', b', x'] = sum_{r, i} t2[r, x', i, b'] row[r, i, r']
    let t2 = t2
        .into_shape_with_order((rr, rx2, m, ra2))
        .expect("sized")
        .permuted_axes([1, 3, 0, 2]) // (rx2, ra2, rr, m)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((rx2 * ra2, rr * m))
        .expect("sized");
    let r2m = row_core
        .view()
        .into_shape_with_order((rr * m, rr2))
        .expect("contiguous");
    let t3 = mm(t2.view(), r2m); // (rx2*ra2, rr2)
    t3.into_shape_with_order((rx2, ra2, rr2))
        .expect("sized")
        .permuted_axes([2, 1, 0])
        .as_standard_layout()
        .into_owned()
}

/// Mirror of [`promote_op_left`]: `next` at bond `k+1` becomes the
/// interface at bond `k`.
pub(crate) fn promote_op_right(
    next: &Array3<f64>,
    row_core: &Array3<f64>,
    a_core: &Array4<f64>,
    col_core: &Array3<f64>,
) -> Array3<f64> {
    let (rr2, ra2, rx2) = next.dim();
    let (rr, m, _) = row_core.dim();
    let (ra, _, n, _) = a_core.dim();
    let (rx, _, _) = col_core.dim();

    // t1[x, j, r', b'] = sum_x' col[x, j, x'] next[r', b', x']
    let c2 = col_core
        .view()
        .into_shape_with_order((rx * n, rx2))
        .expect("contiguous");
    let n2 = next
        .view()
        .into_shape_with_order((rr2 * ra2, rx2))
        .expect("contiguous");
    let t1 = mm(c2, n2.t()); // (rx*n, rr2*ra2)

    // t2[x, r', b, i] = sum_{j, b'} t1[x, j, r', b'] A[b, i, j, b']
    let t1 = t1
        .into_shape_with_order((rx, n, rr2, ra2))
        .expect("sized")
        .permuted_axes([0, 2, 1, 3]) // (rx, rr2, n, ra2)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((rx * rr2, n * ra2))
        .expect("sized");
    let a_p = a_core
        .view()
        .permuted_axes([2, 3, 0, 1]) // (n, ra2, ra, m)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((n * ra2, ra * m))
        .expect("sized");
    let t2 = mm(t1.view(), a_p.view()); // (rx*rr2, ra*m)

    // out[r, b, x] = sum_{r', i} t2[x, r', b, i] row[r, i, r']
    let t2 = t2
        .into_shape_with_order((rx, rr2, ra, m))
        .expect("sized")
        .permuted_axes([0, 2, 1, 3]) // (rx, ra, rr2, m)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((rx * ra, rr2 * m))
        .expect("sized");
    let r_p = row_core
        .view()
        .permuted_axes([2, 1, 0]) // (rr2, m, rr)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((rr2 * m, rr))
        .expect("sized");
    let t3 = mm(t2.view(), r_p.view()); // (rx*ra, rr)
    t3.into_shape_with_order((rx, ra, rr))
        .expect("sized")
        .permuted_axes([2, 1, 0])
        .as_standard_layout()
        .into_owned()
}

/// Vector interface, left to right: `prev (rr, rb)` to `(rr', rb')`.
pub(crate) fn promote_vec_left(
    prev: &Array2<f64>,
    row_core: &Array3<f64>,
    b_core: &Array3<f64>,
) -> Array2<f64> {
    let (rr, m, rr2) = row_core.dim();
    let (rb, _, rb2) = b_core.dim();
    let b2 = b_core
        .view()
        .into_shape_with_order((rb, m * rb2))
        .expect("contiguous");
    let t1 = mm(prev.view(), b2); // (rr, m*rb2)
    let t1 = t1
        .into_shape_with_order((rr * m, rb2))
        .expect("regrouping");
    let r2 = row_core
        .view()
        .into_shape_with_order((rr * m, rr2))
        .expect("contiguous");
    mm(r2.t(), t1.view()) // (rr2, rb2)
}

/// Vector interface, right to left: `next (rr', rb')` to `(rr, rb)`.
pub(crate) fn promote_vec_right(
    next: &Array2<f64>,
    row_core: &Array3<f64>,
    b_core: &Array3<f64>,
) -> Array2<f64> {
    let (rr, m, rr2) = row_core.dim();
    let (rb, _, rb2) = b_core.dim();
    let b2 = b_core
        .view()
        .into_shape_with_order((rb * m, rb2))
        .expect("contiguous");
    let t1 = mm(b2, next.t()); // (rb*m, rr2)
    let t1 = t1
        .into_shape_with_order((rb, m * rr2))
        .expect("regrouping");
    let r2 = row_core
        .view()
        .into_shape_with_order((rr, m * rr2))
        .expect("contiguous");
    mm(r2, t1.t()) // (rr, rb)
}

fn ones3() -> Array3<f64> {
    Array3::ones((1, 1, 1))
}

fn ones2() -> Array2<f64> {
    Array2::ones((1, 1))
}

fn frob2(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One left-to-right solving half-sweep. When `adapt` is set the solved
/// cores are SVD-truncated and (for `kick_rank > 0`, with `z` given) the
/// basis is enriched with the projected residual; otherwise cores are only
/// QR-orthogonalized, keeping ranks fixed. Returns the largest relative
/// local residual encountered.
pub(crate) fn half_sweep(
    a: &TTMatrix,
    b: &TTTensor,
    x: &mut TTTensor,
    mut z: Option<&mut TTTensor>,
    opts: &SolveOptions,
    adapt: bool,
) -> Result<f64> {
    let d = x.ndim();
    right_orthogonalize(x);
    if let Some(zt) = z.as_deref_mut() {
        right_orthogonalize(zt);
    }

    // Right interface stacks over the sweep-start cores. Entry k contracts
    // cores k..d-1; it is consumed while solving core k-1, before any carry
    // reaches core k, so it never goes stale.
    let mut xax_r = vec![ones3(); d + 1];
    let mut xb_r = vec![ones2(); d + 1];
    let mut zax_r = vec![ones3(); d + 1];
    let mut zb_r = vec![ones2(); d + 1];
    for k in (0..d).rev() {
        let xc = x.core(k);
        xax_r[k] = promote_op_right(&xax_r[k + 1], xc, &a.cores()[k], xc);
        xb_r[k] = promote_vec_right(&xb_r[k + 1], xc, &b.cores()[k]);
        if let Some(zt) = z.as_deref() {
            let zc = zt.core(k);
            zax_r[k] = promote_op_right(&zax_r[k + 1], zc, &a.cores()[k], xc);
            zb_r[k] = promote_vec_right(&zb_r[k + 1], zc, &b.cores()[k]);
        }
    }

    let mut xax_l = ones3();
    let mut xb_l = ones2();
    let mut zax_l = ones3();
    let mut zb_l = ones2();

    let dims = d.max(2) as f64;
    let eps_local = opts.eps / (dims - 1.0).sqrt();
    let params = LocalSolveParams {
        tol: (opts.eps / (2.0 * dims.sqrt())).max(1e-14),
        jacobi: opts.jacobi,
        dense_cutoff: opts.dense_cutoff,
    };
    let mut worst_local = 0.0f64;

    for k in 0..d {
        let a_core = &a.cores()[k];
        let b_core = &b.cores()[k];
        let rhs = local_rhs(&xb_l, b_core, &xb_r[k + 1]);
        let warm = x.core(k).clone();
        let (u, local_res) =
            solve_local(k, &xax_l, a_core, &xax_r[k + 1], &rhs, &warm, &params)?;
        worst_local = worst_local.max(local_res);

        if k == d - 1 {
            if let Some(zt) = z.as_deref_mut() {
                let zb = local_rhs(&zb_l, b_core, &zb_r[k + 1]);
                let za = local_matvec(&zax_l, a_core, &zax_r[k + 1], &u);
                *zt.core_mut(k) = &zb - &za;
            }
            *x.core_mut(k) = u;
            break;
        }

        let (rl, n, rr) = u.dim();
        let um = u
            .view()
            .into_shape_with_order((rl * n, rr))
            .expect("contiguous")
            .to_owned();
        let (mut q, mut carry) = if adapt {
            let unorm = frob2(&um);
            let (p, s, vt) = svd_trunc(um.view(), eps_local * unorm, Some(opts.max_rank));
            let mut sv = vt;
            for (i, &si) in s.iter().enumerate() {
                sv.row_mut(i).mapv_inplace(|v| v * si);
            }
            (p, sv)
        } else {
            qr_thin(um.view())
        };

        if adapt && opts.kick_rank > 0 {
            if let Some(zt) = z.as_deref_mut() {
                // Residual projected on (solution frame left, z frame right).
                let kb = local_rhs(&xb_l, b_core, &zb_r[k + 1]);
                let ka = local_matvec(&xax_l, a_core, &zax_r[k + 1], &u);
                let w = &kb - &ka;
                let rz = w.dim().2;
                let wm = w
                    .view()
                    .into_shape_with_order((rl * n, rz))
                    .expect("contiguous")
                    .to_owned();
                let stacked = concatenate![Axis(1), q, wm];
                let (q2, r2) = qr_thin(stacked.view());
                let keep = carry.nrows();
                // The enrichment columns carry zero coefficients, so the
                // represented tensor is unchanged; only the basis grows.
                carry = mm(r2.slice(s![.., ..keep]), carry.view());
                q = q2;

                // New z core: residual in the z bases on both sides.
                let zb = local_rhs(&zb_l, b_core, &zb_r[k + 1]);
                let za = local_matvec(&zax_l, a_core, &zax_r[k + 1], &u);
                let zloc = &zb - &za;
                let (rzl, _, rzr) = zloc.dim();
                let zm = zloc
                    .view()
                    .into_shape_with_order((rzl * n, rzr))
                    .expect("contiguous")
                    .to_owned();
                let (qz, _) = qr_thin(zm.view());
                // Thin QR can return fewer columns than the bond rank on
                // degenerate sizes; pad to keep the z chain intact.
                let qz = if qz.ncols() < rzr {
                    let mut padded = Array2::zeros((rzl * n, rzr));
                    padded.slice_mut(s![.., ..qz.ncols()]).assign(&qz);
                    padded
                } else {
                    qz
                };
                let qz3 = qz.into_shape_with_order((rzl, n, rzr)).expect("sized");
                let xq3 = q
                    .view()
                    .into_shape_with_order((rl, n, q.ncols()))
                    .expect("sized")
                    .to_owned();
                zax_l = promote_op_left(&zax_l, &qz3, a_core, &xq3);
                zb_l = promote_vec_left(&zb_l, &qz3, b_core);
                *zt.core_mut(k) = qz3;
            }
        } else if let Some(zt) = z.as_deref_mut() {
            // Keep z interfaces moving even when not enriching.
            let zc = zt.core(k).clone();
            let xq3 = q
                .view()
                .into_shape_with_order((rl, n, q.ncols()))
                .expect("sized")
                .to_owned();
            zax_l = promote_op_left(&zax_l, &zc, a_core, &xq3);
            zb_l = promote_vec_left(&zb_l, &zc, b_core);
        }

        let rnew = q.ncols();
        let q3 = q.into_shape_with_order((rl, n, rnew)).expect("sized");
        xax_l = promote_op_left(&xax_l, &q3, a_core, &q3);
        xb_l = promote_vec_left(&xb_l, &q3, b_core);
        *x.core_mut(k) = q3;

        let (_, n2, r3) = x.core(k + 1).dim();
        let nxt = x
            .core(k + 1)
            .view()
            .into_shape_with_order((rr, n2 * r3))
            .expect("contiguous")
            .to_owned();
        let merged = mm(carry.view(), nxt.view());
        *x.core_mut(k + 1) = merged
            .into_shape_with_order((rnew, n2, r3))
            .expect("sized");
    }

    Ok(worst_local)
}
