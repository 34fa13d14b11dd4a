//! The maxvol contract: the selected square submatrix S of a tall matrix M
//! dominates every row, in the sense that all entries of M * inv(S) stay
//! below 1 + delta.

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tt_core::linalg::LuFactor;
use tt_cross::maxvol;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
}

/// Largest |entry| of M * inv(M[rows]).
fn dominance(m: &Array2<f64>, rows: &[usize]) -> f64 {
    let r = rows.len();
    let mut sub = Array2::zeros((r, r));
    for (s, &row) in rows.iter().enumerate() {
        sub.row_mut(s).assign(&m.row(row));
    }
    // B = M inv(S)  <=>  S^T B^T = M^T.
    let lu = LuFactor::new(sub.t().to_owned().view()).expect("square");
    let b = lu
        .solve_mat(m.t().to_owned().view())
        .expect("maxvol submatrix must be invertible");
    b.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

#[test]
fn every_row_is_dominated_within_the_tolerance() {
    let m = random_matrix(50, 5, 7);
    let rows = maxvol(m.view(), 0.01).unwrap();
    assert_eq!(rows.len(), 5);
    let mut sorted = rows.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), 5, "selected rows must be distinct");
    assert!(rows.iter().all(|&r| r < 50));

    let worst = dominance(&m, &rows);
    assert!(
        worst <= 1.01 + 1e-12,
        "row dominance {worst} exceeds 1 + delta"
    );
}

#[test]
fn selection_beats_an_arbitrary_starting_set() {
    // The first r rows of this matrix are tiny, so the initial pivoting
    // must look further down; the swap loop then certifies dominance.
    let mut m = random_matrix(40, 4, 11);
    for i in 0..4 {
        for j in 0..4 {
            m[[i, j]] *= 1e-6;
        }
    }
    let rows = maxvol(m.view(), 0.01).unwrap();
    let worst = dominance(&m, &rows);
    assert!(worst <= 1.01 + 1e-12);
    assert!(
        rows.iter().any(|&r| r >= 4),
        "selection stayed on the deflated rows"
    );
}

#[test]
fn square_input_returns_all_rows() {
    let m = random_matrix(6, 6, 3);
    let mut rows = maxvol(m.view(), 0.01).unwrap();
    rows.sort_unstable();
    assert_eq!(rows, vec![0, 1, 2, 3, 4, 5]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dominance_bound_holds_for_random_shapes(
        rows in 6usize..48,
        cols in 2usize..6,
        seed in 0u64..1_000,
    ) {
        prop_assume!(rows > cols);
        let m = random_matrix(rows, cols, seed);
        let sel = maxvol(m.view(), 0.01).unwrap();
        prop_assert_eq!(sel.len(), cols);
        let worst = dominance(&m, &sel);
        prop_assert!(worst <= 1.01 + 1e-10, "dominance {} too large", worst);
    }
}
