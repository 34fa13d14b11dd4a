use ndarray::{Array2, ArrayView2};

use crate::cross::CrossError;

/// Selects `r` rows of a tall `n x r` matrix whose submatrix has
/// quasi-maximal volume: after convergence every entry of
/// `M * inv(M[rows])` is bounded by `1 + delta` in absolute value.
///
/// Starts from the pivot rows of a partially pivoted elimination and then
/// applies rank-1 swap updates until no entry exceeds the bound.
pub fn maxvol(m: ArrayView2<'_, f64>, delta: f64) -> Result<Vec<usize>, CrossError> {
    let (n, r) = (m.nrows(), m.ncols());
    if r == 0 || n < r {
        return Err(CrossError::BadMatrix(format!(
            "maxvol needs a tall matrix, got {n} x {r}"
        )));
    }

    // Greedy initialization: Gaussian elimination with row pivoting; the
    // pivot rows form a reasonable starting set and expose rank deficiency.
    let mut work = m.to_owned();
    let mut rows: Vec<usize> = (0..n).collect();
    let scale = m.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    for k in 0..r {
        let mut best = k;
        let mut best_val = 0.0;
        for i in k..n {
            let v = work[(i, k)].abs();
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        if best_val <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return Err(CrossError::RankDeficient);
        }
        if best != k {
            rows.swap(k, best);
            for j in 0..r {
                let tmp = work[(k, j)];
                work[(k, j)] = work[(best, j)];
                work[(best, j)] = tmp;
            }
        }
        let piv = work[(k, k)];
        for i in k + 1..n {
            let factor = work[(i, k)] / piv;
            if factor != 0.0 {
                for j in k..r {
                    work[(i, j)] -= factor * work[(k, j)];
                }
            }
        }
    }
    let mut selected: Vec<usize> = rows[..r].to_vec();

    // B = M * inv(M[selected]) via LU solve of the submatrix transpose.
    let mut b = coefficient_matrix(m, &selected)?;

    let max_iters = 200 + 20 * r;
    for _ in 0..max_iters {
        // Largest |B| entry.
        let (mut bi, mut bj, mut bv) = (0usize, 0usize, 0.0f64);
        for i in 0..n {
            for j in 0..r {
                let v = b[(i, j)].abs();
                if v > bv {
                    bv = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if bv <= 1.0 + delta {
            return Ok(selected);
        }
        // Swap row bi into slot bj and update B by the rank-1 formula.
        let pivot = b[(bi, bj)];
        let col_j: Vec<f64> = (0..n).map(|i| b[(i, bj)]).collect();
        let mut row_i: Vec<f64> = (0..r).map(|j| b[(bi, j)]).collect();
        row_i[bj] -= 1.0;
        for i in 0..n {
            let c = col_j[i] / pivot;
            if c != 0.0 {
                for j in 0..r {
                    b[(i, j)] -= c * row_i[j];
                }
            }
        }
        selected[bj] = bi;
    }
    // The volume increases strictly at each swap, so in exact arithmetic we
    // cannot cycle; running out of iterations means numerical stagnation
    // right at the bound, and the current set is still usable.
    Ok(selected)
}

fn coefficient_matrix(
    m: ArrayView2<'_, f64>,
    selected: &[usize],
) -> Result<Array2<f64>, CrossError> {
    let r = selected.len();
    let mut sub = Array2::zeros((r, r));
    for (a, &row) in selected.iter().enumerate() {
        sub.row_mut(a).assign(&m.row(row));
    }
    // Solve X * sub = M, i.e. sub^T * X^T = M^T.
    let lu = tt_core::linalg::LuFactor::new(sub.t().to_owned().view())
        .map_err(|_| CrossError::RankDeficient)?;
    let solved = lu
        .solve_mat(m.t().to_owned().view())
        .ok_or(CrossError::RankDeficient)?;
    Ok(solved.t().to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identity_topped_matrix_selects_identity_rows() {
        let m = array![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.3, 0.2, 0.1],
            [-0.4, 0.5, 0.2],
        ];
        let mut rows = maxvol(m.view(), 0.01).unwrap();
        rows.sort_unstable();
        assert_eq!(rows, vec![0, 1, 2]);
    }

    #[test]
    fn single_column_selects_max_abs_entry() {
        let m = array![[0.1], [-0.9], [0.4], [0.3]];
        let rows = maxvol(m.view(), 0.01).unwrap();
        assert_eq!(rows, vec![1]);
    }

    #[test]
    fn rank_deficient_input_is_reported() {
        let m = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        assert!(matches!(
            maxvol(m.view(), 0.01),
            Err(CrossError::RankDeficient)
        ));
    }
}
