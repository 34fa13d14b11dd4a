//! Single-mode contractions on TT tensors.
//!
//! The geometry and assembly pipelines are built from operations that touch
//! one mode at a time: applying a collocation matrix along a mode, solving a
//! univariate interpolation system along a mode, and contracting modes with
//! vectors. All of them act on a single core and leave the TT ranks alone.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Array3, ArrayView2, Axis};
use tt_core::linalg::LuFactor;
use tt_core::{TTMatrix, TTTensor};

use crate::error::{IgaError, Result};

/// Matrix product with a guaranteed C-order result, independent of the
/// operands' strides.
pub(crate) fn mm(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    general_mat_mul(1.0, &a, &b, 0.0, &mut out);
    out
}

fn core_as_matrix(c: &Array3<f64>) -> (Array2<f64>, usize, usize, usize) {
    let (r, n, s) = c.dim();
    let m = c
        .view()
        .permuted_axes([1, 0, 2])
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((n, r * s))
        .expect("contiguous by construction");
    (m, r, n, s)
}

fn matrix_as_core(m: Array2<f64>, r: usize, s: usize) -> Array3<f64> {
    let n = m.nrows();
    m.into_shape_with_order((n, r, s))
        .expect("sized by construction")
        .permuted_axes([1, 0, 2])
        .as_standard_layout()
        .into_owned()
}

/// Applies `a` along mode `k`: the result has mode-`k` size `a.nrows()` and
/// entries `sum_j a[i, j] t[..., j, ...]`.
pub fn mode_apply(t: &TTTensor, k: usize, a: ArrayView2<'_, f64>) -> Result<TTTensor> {
    let shape = t.shape();
    if k >= shape.len() {
        return Err(IgaError::Invalid(format!("mode {k} out of range")));
    }
    if a.ncols() != shape[k] {
        return Err(IgaError::Invalid(format!(
            "matrix has {} columns, mode {k} has size {}",
            a.ncols(),
            shape[k]
        )));
    }
    let mut cores: Vec<Array3<f64>> = t.cores().to_vec();
    let (m, r, _, s) = core_as_matrix(&cores[k]);
    cores[k] = matrix_as_core(mm(a, m.view()), r, s);
    Ok(TTTensor::new(cores)?)
}

/// Solves `B z = t` along mode `k` for a prefactored square `B`.
pub fn mode_solve(t: &TTTensor, k: usize, b: &LuFactor) -> Result<TTTensor> {
    let shape = t.shape();
    if k >= shape.len() {
        return Err(IgaError::Invalid(format!("mode {k} out of range")));
    }
    let mut cores: Vec<Array3<f64>> = t.cores().to_vec();
    let (m, r, _, s) = core_as_matrix(&cores[k]);
    let solved = b
        .solve_mat(m.view())
        .ok_or_else(|| IgaError::Degenerate("singular interpolation system".into()))?;
    cores[k] = matrix_as_core(solved, r, s);
    Ok(TTTensor::new(cores)?)
}

/// Full contraction with one vector per mode.
pub fn contract_all(t: &TTTensor, vecs: &[&[f64]]) -> Result<f64> {
    let shape = t.shape();
    if vecs.len() != shape.len() {
        return Err(IgaError::Invalid(format!(
            "{} vectors for {} modes",
            vecs.len(),
            shape.len()
        )));
    }
    let mut left = Array2::from_elem((1, 1), 1.0);
    for (k, core) in t.cores().iter().enumerate() {
        if vecs[k].len() != shape[k] {
            return Err(IgaError::Invalid(format!("vector {k} has the wrong length")));
        }
        let slab = contract_mode(core, vecs[k]);
        left = mm(left.view(), slab.view());
    }
    Ok(left[(0, 0)])
}

/// `sum_i v[i] core[:, i, :]`.
fn contract_mode(core: &Array3<f64>, v: &[f64]) -> Array2<f64> {
    let (r, _, s) = core.dim();
    let mut out = Array2::zeros((r, s));
    for (i, &vi) in v.iter().enumerate() {
        out.scaled_add(vi, &core.index_axis(Axis(1), i));
    }
    out
}

/// Contracts the trailing modes `k0..d` with the given vectors, leaving a
/// TT tensor over the first `k0` modes.
pub fn contract_trailing(t: &TTTensor, k0: usize, vecs: &[&[f64]]) -> Result<TTTensor> {
    let shape = t.shape();
    let d = shape.len();
    if k0 == 0 || k0 > d || vecs.len() != d - k0 {
        return Err(IgaError::Invalid("bad trailing contraction".into()));
    }
    let mut right = Array1::from_elem(1, 1.0);
    for k in (k0..d).rev() {
        if vecs[k - k0].len() != shape[k] {
            return Err(IgaError::Invalid(format!("vector for mode {k} has the wrong length")));
        }
        let slab = contract_mode(&t.cores()[k], vecs[k - k0]);
        right = slab.dot(&right);
    }
    let mut cores: Vec<Array3<f64>> = t.cores()[..k0].to_vec();
    let last = &cores[k0 - 1];
    let (r, n, s) = last.dim();
    let mut merged = Array3::zeros((r, n, 1));
    for a in 0..r {
        for i in 0..n {
            let mut acc = 0.0;
            for c in 0..s {
                acc += last[(a, i, c)] * right[c];
            }
            merged[(a, i, 0)] = acc;
        }
    }
    cores[k0 - 1] = merged;
    Ok(TTTensor::new(cores)?)
}

/// Quadratic/bilinear form `x' A y` contracted mode by mode, never forming
/// the product `A y` (whose bond ranks would multiply).
pub fn bilinear_form(a: &TTMatrix, x: &TTTensor, y: &TTTensor) -> Result<f64> {
    if a.row_shape() != x.shape() || a.col_shape() != y.shape() {
        return Err(IgaError::Invalid("bilinear form shape mismatch".into()));
    }
    // Carry c[(alpha_x, alpha_a, alpha_y)] over the three rank chains.
    let mut carry = Array3::from_elem((1, 1, 1), 1.0);
    for k in 0..x.ndim() {
        let xc = &x.cores()[k];
        let ac = &a.cores()[k];
        let yc = &y.cores()[k];
        let (rx, n, rx2) = xc.dim();
        let (ra, _, m, ra2) = ac.dim();
        let (ry, _, ry2) = yc.dim();

        // c . Y over alpha_y: (rx ra, ry) x (ry, m ry2).
        let cm = carry
            .into_shape_with_order((rx * ra, ry))
            .expect("carry is contiguous");
        let ym = yc
            .view()
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((ry, m * ry2))
            .expect("core is contiguous");
        // d[(alpha_x, alpha_a, j, beta_y)]
        let d = mm(cm.view(), ym.view());

        // d . A over (alpha_a, j): permute d to (alpha_x, beta_y, alpha_a, j)
        // and A to (alpha_a, j, i, beta_a).
        let d4 = d
            .into_shape_with_order((rx, ra, m, ry2))
            .expect("sized by construction")
            .permuted_axes([0, 3, 1, 2])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((rx * ry2, ra * m))
            .expect("contiguous");
        let am = ac
            .view()
            .permuted_axes([0, 2, 1, 3])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((ra * m, n * ra2))
            .expect("contiguous");
        // e[(alpha_x, beta_y, i, beta_a)]
        let e = mm(d4.view(), am.view());

        // e . X over (alpha_x, i).
        let e4 = e
            .into_shape_with_order((rx, ry2, n, ra2))
            .expect("sized by construction")
            .permuted_axes([1, 3, 0, 2])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((ry2 * ra2, rx * n))
            .expect("contiguous");
        let xm = xc
            .view()
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((rx * n, rx2))
            .expect("contiguous");
        // f[(beta_y, beta_a, beta_x)] -> reorder to (beta_x, beta_a, beta_y).
        let f = mm(e4.view(), xm.view())
            .into_shape_with_order((ry2, ra2, rx2))
            .expect("sized by construction");
        carry = f
            .permuted_axes([2, 1, 0])
            .as_standard_layout()
            .into_owned();
    }
    Ok(carry[(0, 0, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tt_core::DenseTensor;

    fn random_tt(shape: &[usize], rank: usize, seed: u64) -> TTTensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TTTensor::random_with(shape, rank, || rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn mode_apply_matches_dense_contraction() {
        let t = random_tt(&[3, 4, 5], 3, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Array2::from_shape_fn((6, 4), |_| rng.gen_range(-1.0..1.0));
        let got = mode_apply(&t, 1, a.view()).unwrap().to_dense().unwrap();
        let td = t.to_dense().unwrap();
        let want = DenseTensor::from_fn(vec![3, 6, 5], |idx| {
            (0..4).map(|j| a[(idx[1], j)] * td.data()[(idx[0] * 4 + j) * 5 + idx[2]]).sum()
        })
        .unwrap();
        for (x, y) in got.data().iter().zip(want.data()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn mode_solve_undoes_mode_apply() {
        let t = random_tt(&[4, 3, 2], 2, 17);
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let mut a = Array2::from_shape_fn((3, 3), |_| rng.gen_range(-1.0..1.0));
        for i in 0..3 {
            a[(i, i)] += 3.0;
        }
        let lu = LuFactor::new(a.view()).unwrap();
        let applied = mode_apply(&t, 1, a.view()).unwrap();
        let back = mode_solve(&applied, 1, &lu).unwrap();
        let x = back.to_dense().unwrap();
        let y = t.to_dense().unwrap();
        for (a, b) in x.data().iter().zip(y.data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn contract_all_matches_entry_on_cardinal_vectors() {
        let t = random_tt(&[3, 2, 4, 3], 3, 21);
        let e = |n: usize, i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        let (v0, v1, v2, v3) = (e(3, 2), e(2, 0), e(4, 3), e(3, 1));
        let got = contract_all(&t, &[&v0, &v1, &v2, &v3]).unwrap();
        assert_abs_diff_eq!(got, t.entry(&[2, 0, 3, 1]), epsilon = 1e-13);
    }

    #[test]
    fn bilinear_form_matches_dense_on_rectangular_operator() {
        let rows = [3usize, 2, 4];
        let cols = [2usize, 3, 2];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = TTMatrix::random_with(&rows, &cols, 3, || rng.gen_range(-1.0..1.0)).unwrap();
        let x = random_tt(&rows, 2, 6);
        let y = random_tt(&cols, 3, 7);
        let got = bilinear_form(&a, &x, &y).unwrap();
        let am = a.full_matrix().unwrap();
        let xv = Array1::from(x.to_dense().unwrap().data().to_vec());
        let yv = Array1::from(y.to_dense().unwrap().data().to_vec());
        let want = xv.dot(&am.dot(&yv));
        assert_abs_diff_eq!(got, want, epsilon = 1e-10 * want.abs().max(1.0));
        assert!(bilinear_form(&a, &y, &x).is_err());
    }

    #[test]
    fn contract_trailing_agrees_with_full_contraction() {
        let t = random_tt(&[3, 4, 2, 3, 2], 3, 33);
        let w1 = vec![0.3, -0.7, 1.1];
        let w2 = vec![0.9, 0.4];
        let partial = contract_trailing(&t, 3, &[&w1, &w2]).unwrap();
        assert_eq!(partial.shape(), vec![3, 4, 2]);
        let e = |n: usize, i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        for idx in [[0usize, 1, 0], [2, 3, 1], [1, 2, 1]] {
            let (a, b, c) = (e(3, idx[0]), e(4, idx[1]), e(2, idx[2]));
            let want = contract_all(&t, &[&a, &b, &c, &w1, &w2]).unwrap();
            assert_abs_diff_eq!(partial.entry(&idx), want, epsilon = 1e-12);
        }
    }
}
