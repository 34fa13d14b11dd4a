//! Conversion and rounding checks against dense arithmetic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tt_core::{DenseTensor, TTTensor};

fn random_dense(shape: &[usize], rng: &mut ChaCha8Rng) -> DenseTensor {
    let len: usize = shape.iter().product();
    let data: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DenseTensor::new(shape.to_vec(), data).unwrap()
}

fn rel_err(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.sub(b).unwrap().norm() / b.norm().max(f64::MIN_POSITIVE)
}

#[test]
fn outer_product_compresses_to_rank_one() {
    let a = [1.0, -2.0, 0.5];
    let b = [3.0, 0.25, -1.0, 2.0];
    let c = [0.7, 1.3];
    let x = DenseTensor::from_fn(vec![3, 4, 2], |idx| a[idx[0]] * b[idx[1]] * c[idx[2]]).unwrap();
    let t = TTTensor::from_dense(&x, 1e-12).unwrap();
    assert_eq!(t.ranks(), vec![1, 1, 1, 1]);
    assert!(rel_err(&t.to_dense().unwrap(), &x) < 1e-13);
}

#[test]
fn random_cube_reconstructs_at_tight_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_dense(&[8, 8, 8], &mut rng);
    let t = TTTensor::from_dense(&x, 1e-14).unwrap();
    assert!(rel_err(&t.to_dense().unwrap(), &x) < 1e-12);
}

#[test]
fn eps_zero_round_trip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for shape in [vec![5], vec![4, 7], vec![3, 5, 2, 4]] {
        let x = random_dense(&shape, &mut rng);
        let t = TTTensor::from_dense(&x, 0.0).unwrap();
        assert!(rel_err(&t.to_dense().unwrap(), &x) < 1e-12);
    }
}

#[test]
fn compression_error_respects_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_dense(&[6, 6, 6, 6], &mut rng);
    for eps in [1e-1, 1e-3, 1e-8] {
        let t = TTTensor::from_dense(&x, eps).unwrap();
        assert!(
            rel_err(&t.to_dense().unwrap(), &x) <= eps,
            "eps = {eps} violated"
        );
    }
}

#[test]
fn low_rank_tensor_recovers_its_rank() {
    // Sum of two separable terms has TT ranks exactly 2 away from the ends.
    let x = DenseTensor::from_fn(vec![5, 6, 7], |idx| {
        let (i, j, k) = (idx[0] as f64, idx[1] as f64, idx[2] as f64);
        i.sin() * (0.5 * j).cos() * (0.1 * k).exp() + (0.3 * i).cos() * j.sin() * (0.2 * k).sin()
    })
    .unwrap();
    let t = TTTensor::from_dense(&x, 1e-10).unwrap();
    assert_eq!(t.ranks(), vec![1, 2, 2, 1]);
}

#[test]
fn budget_is_enforced_on_densify() {
    let t = TTTensor::ones(&[10, 10, 10]);
    let err = t.to_dense_budget(999).unwrap_err();
    assert!(matches!(err, tt_core::TtError::BudgetExceeded { .. }));
    assert!(t.to_dense_budget(1000).is_ok());
}

#[test]
fn rounding_contract_over_tolerance_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let t = TTTensor::random_with(&[7, 6, 5, 4], 12, || rng.gen_range(-1.0..1.0));
    let dense = t.to_dense().unwrap();
    let norm = dense.norm();
    for eps in [1e-2, 1e-6, 1e-10] {
        let r = t.round(eps);
        let err = r.to_dense().unwrap().sub(&dense).unwrap().norm();
        assert!(err <= eps * norm, "eps = {eps}: {err} > {}", eps * norm);
        assert!(r
            .ranks()
            .iter()
            .zip(t.ranks())
            .all(|(&a, b)| a <= b));
    }
}

#[test]
fn round_at_zero_keeps_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let t = TTTensor::random_with(&[4, 5, 6], 5, || rng.gen_range(-1.0..1.0));
    let r = t.round(0.0);
    let err = r
        .to_dense()
        .unwrap()
        .sub(&t.to_dense().unwrap())
        .unwrap()
        .norm();
    assert!(err < 1e-13 * t.norm());
}

#[test]
fn doubling_then_rounding_restores_ranks() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let t = TTTensor::random_with(&[5, 4, 6, 3], 3, || rng.gen_range(-1.0..1.0));
    let doubled = t.add(&t).unwrap();
    assert_eq!(doubled.ranks(), vec![1, 6, 6, 6, 1]);
    let back = doubled.round(1e-12);
    assert_eq!(back.ranks(), t.ranks());
}

#[test]
fn rank_cap_is_respected() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let t = TTTensor::random_with(&[6, 6, 6], 6, || rng.gen_range(-1.0..1.0));
    let capped = t.round_with_max_rank(0.0, Some(2));
    assert!(capped.max_rank() <= 2);
}

#[test]
fn norm_matches_dense_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let t = TTTensor::random_with(&[5, 7, 4], 4, || rng.gen_range(-1.0..1.0));
    let dense_norm = t.to_dense().unwrap().norm();
    assert!((t.norm() - dense_norm).abs() < 1e-12 * dense_norm);
    // And on a tensor that cancels almost completely, the orthogonalized
    // norm must still track the dense value rather than the operand sizes.
    let perturbed = t.scale(1.0 + 1e-9);
    let diff = perturbed.sub(&t).unwrap();
    let dense_diff = diff.to_dense().unwrap().norm();
    assert!((diff.norm() - dense_diff).abs() < 1e-12 * dense_norm);
    assert!(diff.norm() < 1e-8 * t.norm());
}

#[test]
fn entry_matches_dense_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let t = TTTensor::random_with(&[3, 4, 2, 3], 3, || rng.gen_range(-1.0..1.0));
    let dense = t.to_dense().unwrap();
    for (idx, v) in dense.iter_indexed() {
        assert!((t.entry(&idx) - v).abs() < 1e-13);
    }
}
