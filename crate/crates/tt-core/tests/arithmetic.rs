//! Elementwise and operator arithmetic checked against dense oracles.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tt_core::{DenseTensor, TTMatrix, TTTensor};

fn random_tt(shape: &[usize], rank: usize, seed: u64) -> TTTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TTTensor::random_with(shape, rank, || rng.gen_range(-1.0..1.0))
}

fn dense_of(t: &TTTensor) -> DenseTensor {
    t.to_dense().unwrap()
}

#[test]
fn add_and_hadamard_match_dense() {
    let shape = [4, 5, 3];
    let a = random_tt(&shape, 3, 31);
    let b = random_tt(&shape, 3, 32);
    let (da, db) = (dense_of(&a), dense_of(&b));

    let sum = a.add(&b).unwrap();
    assert_eq!(sum.ranks(), vec![1, 6, 6, 1]);
    let want = DenseTensor::from_fn(shape.to_vec(), |idx| da.get(idx) + db.get(idx)).unwrap();
    assert!(dense_of(&sum).sub(&want).unwrap().norm() < 1e-12 * want.norm());

    let prod = a.hadamard(&b).unwrap();
    assert_eq!(prod.ranks(), vec![1, 9, 9, 1]);
    let want = DenseTensor::from_fn(shape.to_vec(), |idx| da.get(idx) * db.get(idx)).unwrap();
    assert!(dense_of(&prod).sub(&want).unwrap().norm() < 1e-12 * want.norm());
}

#[test]
fn subtracting_a_tensor_from_itself_rounds_to_zero() {
    // The difference is cancellation noise at machine precision; its ranks
    // are not meaningful, but the value must be zero relative to |a|.
    let a = random_tt(&[4, 4, 4], 3, 33);
    let z = a.add(&a.scale(-1.0)).unwrap().round(1e-12);
    assert!(z.norm() < 1e-14 * a.norm());
    assert!(z
        .ranks()
        .iter()
        .zip(a.add(&a).unwrap().ranks())
        .all(|(&r, s)| r <= s));
}

#[test]
fn hadamard_with_ones_is_identity() {
    let b = random_tt(&[3, 6, 2], 2, 34);
    let p = TTTensor::ones(&[3, 6, 2]).hadamard(&b).unwrap();
    assert!(dense_of(&p).sub(&dense_of(&b)).unwrap().norm() < 1e-13);
}

#[test]
fn dot_examples_and_oracle() {
    let t = random_tt(&[3, 4], 2, 35);
    assert_eq!(t.dot(&TTTensor::zeros(&[3, 4])).unwrap(), 0.0);
    let ones = TTTensor::ones(&[2, 2]);
    assert!((ones.dot(&ones).unwrap() - 4.0).abs() < 1e-14);

    let a = random_tt(&[4, 3, 5], 3, 36);
    let b = random_tt(&[4, 3, 5], 2, 37);
    let (da, db) = (dense_of(&a), dense_of(&b));
    let want: f64 = da.data().iter().zip(db.data()).map(|(x, y)| x * y).sum();
    assert!((a.dot(&b).unwrap() - want).abs() < 1e-12 * want.abs().max(1.0));
    assert!(a.dot(&a).unwrap() >= 0.0);
}

#[test]
fn scale_modes_matches_hadamard_with_rank_one() {
    let a = random_tt(&[3, 4, 2], 3, 38);
    let v1 = vec![0.5, -1.0, 2.0];
    let v3 = vec![3.0, 0.25];
    let scaled = a
        .scale_modes(&[Some(&v1), None, Some(&v3)])
        .unwrap();
    let ones = vec![1.0; 4];
    let rank_one = TTTensor::rank_one(&[&v1, &ones, &v3]).unwrap();
    let want = a.hadamard(&rank_one).unwrap();
    assert!(dense_of(&scaled).sub(&dense_of(&want)).unwrap().norm() < 1e-13);
    assert_eq!(scaled.ranks(), a.ranks());
}

fn random_ttm(rows: &[usize], cols: &[usize], rank: usize, seed: u64) -> TTMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TTMatrix::random_with(rows, cols, rank, || rng.gen_range(-1.0..1.0)).unwrap()
}

/// Flattens a TT tensor into a vector with last-index-fastest ordering,
/// matching the row/column linearization of `full_matrix`.
fn vectorize(t: &TTTensor) -> Array1<f64> {
    Array1::from(dense_of(t).data().to_vec())
}

#[test]
fn apply_matches_dense_matvec() {
    let a = random_ttm(&[3, 4, 2], &[2, 5, 3], 3, 41);
    let x = random_tt(&[2, 5, 3], 3, 42);
    let y = a.apply(&x).unwrap();
    assert_eq!(y.shape(), vec![3, 4, 2]);
    let want = a.full_matrix().unwrap().dot(&vectorize(&x));
    let got = vectorize(&y);
    let err = (&got - &want).iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(err < 1e-12 * want.iter().map(|v| v * v).sum::<f64>().sqrt());
}

#[test]
fn apply_is_linear() {
    let a = random_ttm(&[4, 3], &[4, 3], 4, 43);
    let x = random_tt(&[4, 3], 2, 44);
    let y = random_tt(&[4, 3], 3, 45);
    let (alpha, beta) = (0.7, -1.9);
    let lhs = a
        .apply(&x.scale(alpha).add(&y.scale(beta)).unwrap())
        .unwrap()
        .round(1e-13);
    let rhs = a
        .apply(&x)
        .unwrap()
        .scale(alpha)
        .add(&a.apply(&y).unwrap().scale(beta))
        .unwrap()
        .round(1e-13);
    let err = dense_of(&lhs).sub(&dense_of(&rhs)).unwrap().norm();
    assert!(err < 1e-12 * dense_of(&rhs).norm());
}

#[test]
fn identity_and_diag_act_pointwise() {
    let x = random_tt(&[3, 4, 5], 3, 46);
    let id = TTMatrix::identity(&[3, 4, 5]);
    assert!(dense_of(&id.apply(&x).unwrap())
        .sub(&dense_of(&x))
        .unwrap()
        .norm()
        < 1e-13);

    let d = random_tt(&[3, 4, 5], 2, 47);
    let dx = TTMatrix::diag(&d).apply(&x).unwrap();
    let want = d.hadamard(&x).unwrap();
    assert!(dense_of(&dx).sub(&dense_of(&want)).unwrap().norm() < 1e-12);
    let diag_back = TTMatrix::diag(&d).diagonal().unwrap();
    assert!(dense_of(&diag_back).sub(&dense_of(&d)).unwrap().norm() < 1e-13);
}

#[test]
fn matmul_matches_dense_product() {
    let a = random_ttm(&[3, 2, 4], &[2, 3, 2], 2, 48);
    let b = random_ttm(&[2, 3, 2], &[4, 2, 3], 2, 49);
    let c = a.matmul(&b).unwrap();
    let want: Array2<f64> = a.full_matrix().unwrap().dot(&b.full_matrix().unwrap());
    let got = c.full_matrix().unwrap();
    let err = (&got - &want).iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(err < 1e-12 * want.iter().map(|v| v * v).sum::<f64>().sqrt());
}

#[test]
fn operator_add_transpose_and_rounding() {
    let a = random_ttm(&[3, 4], &[3, 4], 2, 50);
    let b = random_ttm(&[3, 4], &[3, 4], 2, 51);
    let sum = a.add(&b).unwrap();
    let want = &a.full_matrix().unwrap() + &b.full_matrix().unwrap();
    let got = sum.full_matrix().unwrap();
    let err = (&got - &want).iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(err < 1e-12);

    let at = a.transpose().full_matrix().unwrap();
    let full = a.full_matrix().unwrap();
    assert!((&at - &full.t()).iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-13);

    // Rounding an operator made redundant by doubling restores its ranks.
    let doubled = a.add(&a).unwrap();
    assert_eq!(doubled.round(1e-12).ranks(), a.ranks());
}

#[test]
fn mode_apply_contracts_each_mode() {
    let x = random_tt(&[4, 3, 5], 3, 52);
    let m = Array2::from_shape_fn((2, 3), |(i, j)| (i as f64 + 1.0) * 0.3 - j as f64 * 0.7);
    let y = x.mode_apply(&[None, Some(m.view()), None]).unwrap();
    assert_eq!(y.shape(), vec![4, 2, 5]);
    assert_eq!(y.ranks(), x.ranks());
    let dx = dense_of(&x);
    let want = DenseTensor::from_fn(vec![4, 2, 5], |idx| {
        (0..3)
            .map(|j| m[(idx[1], j)] * dx.get(&[idx[0], j, idx[2]]))
            .sum()
    })
    .unwrap();
    assert!(dense_of(&y).sub(&want).unwrap().norm() < 1e-12 * want.norm());
}
