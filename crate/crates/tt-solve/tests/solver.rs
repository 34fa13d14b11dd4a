//! Rank-adaptive solver against dense direct oracles.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tt_core::{linalg, TTMatrix, TTTensor};
use tt_solve::{amen_solve, residual_norm, SolveError, SolveOptions};

/// Symmetric positive definite TT operator: R^T R plus a diagonal shift
/// sized from the Frobenius norm, so the condition number stays small.
fn random_spd(shape: &[usize], rank: usize, rng: &mut ChaCha8Rng) -> TTMatrix {
    let r = TTMatrix::random_with(shape, shape, rank, || rng.gen_range(-0.5..0.5)).unwrap();
    let sym = r.transpose().matmul(&r).unwrap().round(1e-14);
    let shift = 0.15 * sym.to_fused_tensor().norm();
    sym.add(&TTMatrix::identity(shape).scale(shift))
        .unwrap()
        .round(1e-14)
}

fn dense_solution(a: &TTMatrix, b: &TTTensor) -> Vec<f64> {
    let ad = a.full_matrix().unwrap();
    let bd = b.to_dense().unwrap();
    linalg::solve_lu(ad.view(), bd.data()).unwrap().to_vec()
}

fn rel_two_norm(got: &TTTensor, want: &[f64]) -> f64 {
    let gd = got.to_dense().unwrap();
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (g, w) in gd.data().iter().zip(want) {
        diff += (g - w) * (g - w);
        scale += w * w;
    }
    (diff / scale.max(1e-300)).sqrt()
}

#[test]
fn identity_system_returns_the_rhs_in_one_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = TTMatrix::identity(&[4, 3, 5]);
    let b = TTTensor::random_with(&[4, 3, 5], 3, || rng.gen_range(-1.0..1.0));
    let opts = SolveOptions {
        eps: 1e-10,
        ..SolveOptions::default()
    };
    let (x, report) = amen_solve(&a, &b, &opts, None).unwrap();
    assert!(report.converged);
    assert_eq!(report.sweeps, 1);
    assert!(x.sub(&b).unwrap().norm() <= 1e-9 * b.norm());
}

#[test]
fn constant_diagonal_inverts_the_scale() {
    let a = TTMatrix::diag(&TTTensor::ones(&[3, 4, 2]).scale(2.0));
    let b = TTTensor::ones(&[3, 4, 2]);
    let opts = SolveOptions {
        eps: 1e-12,
        ..SolveOptions::default()
    };
    let (x, report) = amen_solve(&a, &b, &opts, None).unwrap();
    assert!(report.converged);
    assert_eq!(x.max_rank(), 1);
    let xd = x.to_dense().unwrap();
    for &v in xd.data() {
        assert!((v - 0.5).abs() < 1e-12);
    }
}

#[test]
fn random_spd_system_matches_the_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shape = [6, 6, 6];
    let a = random_spd(&shape, 2, &mut rng);
    let b = TTTensor::random_with(&shape, 2, || rng.gen_range(-1.0..1.0));
    let opts = SolveOptions {
        eps: 1e-8,
        ..SolveOptions::default()
    };
    let (x, report) = amen_solve(&a, &b, &opts, None).unwrap();
    assert!(report.converged, "residual {:.3e}", report.residual);
    let want = dense_solution(&a, &b);
    let dev = rel_two_norm(&x, &want);
    assert!(dev <= 1e-8, "deviation from dense solve: {dev:.3e}");
}

#[test]
fn residual_certificate_survives_dense_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let shape = [5, 4, 6];
    let a = random_spd(&shape, 2, &mut rng);
    let b = TTTensor::random_with(&shape, 3, || rng.gen_range(-1.0..1.0));
    let eps = 1e-8;
    let opts = SolveOptions {
        eps,
        ..SolveOptions::default()
    };
    let (x, report) = amen_solve(&a, &b, &opts, None).unwrap();
    assert!(report.converged);

    let ad = a.full_matrix().unwrap();
    let xd = Array1::from(x.to_dense().unwrap().data().to_vec());
    let bd = Array1::from(b.to_dense().unwrap().data().to_vec());
    let r = ad.dot(&xd) - &bd;
    let rel = r.dot(&r).sqrt() / bd.dot(&bd).sqrt();
    assert!(rel <= 1.5 * eps, "dense residual {rel:.3e}");
    // The TT-recomputed value must agree with the dense one.
    let tt_rel = residual_norm(&a, &x, &b).unwrap();
    assert!((tt_rel - rel).abs() <= 0.1 * rel.max(1e-14));
}

#[test]
fn jacobi_toggle_does_not_move_the_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let shape = [5, 5, 5];
    let a = random_spd(&shape, 2, &mut rng);
    let b = TTTensor::random_with(&shape, 2, || rng.gen_range(-1.0..1.0));
    let eps = 1e-8;
    // dense_cutoff 0 forces every local system through GMRES, which is the
    // only place the preconditioner acts.
    let on = SolveOptions {
        eps,
        dense_cutoff: 0,
        jacobi: true,
        ..SolveOptions::default()
    };
    let off = SolveOptions {
        jacobi: false,
        ..on.clone()
    };
    let (x_on, r_on) = amen_solve(&a, &b, &on, None).unwrap();
    let (x_off, r_off) = amen_solve(&a, &b, &off, None).unwrap();
    assert!(r_on.converged && r_off.converged);
    let dev = x_on.sub(&x_off).unwrap().norm() / x_on.norm();
    assert!(dev <= 10.0 * eps, "jacobi on/off disagree by {dev:.3e}");
}

#[test]
fn iterative_and_dense_local_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let shape = [4, 5, 4];
    let a = random_spd(&shape, 2, &mut rng);
    let b = TTTensor::random_with(&shape, 2, || rng.gen_range(-1.0..1.0));
    let eps = 1e-9;
    let dense = SolveOptions {
        eps,
        ..SolveOptions::default()
    };
    let iterative = SolveOptions {
        eps,
        dense_cutoff: 0,
        ..SolveOptions::default()
    };
    let (x_d, rep_d) = amen_solve(&a, &b, &dense, None).unwrap();
    let (x_i, rep_i) = amen_solve(&a, &b, &iterative, None).unwrap();
    assert!(rep_d.converged && rep_i.converged);
    let dev = x_d.sub(&x_i).unwrap().norm() / x_d.norm();
    assert!(dev <= 10.0 * eps);
}

#[test]
fn nonsymmetric_perturbation_still_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let shape = [5, 4, 5];
    let spd = random_spd(&shape, 2, &mut rng);
    let skew = TTMatrix::random_with(&shape, &shape, 2, || rng.gen_range(-0.5..0.5)).unwrap();
    let scale = 0.05 * spd.to_fused_tensor().norm() / skew.to_fused_tensor().norm();
    let a = spd.add(&skew.scale(scale)).unwrap().round(1e-14);
    let b = TTTensor::random_with(&shape, 2, || rng.gen_range(-1.0..1.0));
    let opts = SolveOptions {
        eps: 1e-8,
        ..SolveOptions::default()
    };
    let (x, report) = amen_solve(&a, &b, &opts, None).unwrap();
    assert!(report.converged, "residual {:.3e}", report.residual);
    let want = dense_solution(&a, &b);
    assert!(rel_two_norm(&x, &want) <= 1e-7);
}

#[test]
fn warm_start_certifies_in_a_single_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let shape = [4, 4, 4];
    let a = random_spd(&shape, 2, &mut rng);
    let b = TTTensor::random_with(&shape, 2, || rng.gen_range(-1.0..1.0));
    let opts = SolveOptions {
        eps: 1e-8,
        ..SolveOptions::default()
    };
    let (x, first) = amen_solve(&a, &b, &opts, None).unwrap();
    assert!(first.converged);
    let (_, second) = amen_solve(&a, &b, &opts, Some(&x)).unwrap();
    assert!(second.converged);
    assert_eq!(second.sweeps, 1);
}

#[test]
fn starved_ranks_are_reported_not_papered_over() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let shape = [6, 6, 6];
    let a = random_spd(&shape, 3, &mut rng);
    let b = TTTensor::random_with(&shape, 4, || rng.gen_range(-1.0..1.0));
    let opts = SolveOptions {
        eps: 1e-10,
        max_rank: 1,
        kick_rank: 1,
        max_sweeps: 3,
        ..SolveOptions::default()
    };
    let (x, report) = amen_solve(&a, &b, &opts, None).unwrap();
    assert!(!report.converged);
    assert!(report.residual > 1e-10);
    assert!(x.max_rank() <= 2); // rank cap plus transient enrichment

    // The reported residual must describe the returned iterate.
    let ad = a.full_matrix().unwrap();
    let xd = Array1::from(x.to_dense().unwrap().data().to_vec());
    let bd = Array1::from(b.to_dense().unwrap().data().to_vec());
    let r = ad.dot(&xd) - &bd;
    let rel = r.dot(&r).sqrt() / bd.dot(&bd).sqrt();
    assert!((report.residual - rel).abs() <= 0.05 * rel);
}

#[test]
fn zero_rhs_short_circuits_to_the_zero_solution() {
    let a = TTMatrix::identity(&[3, 3]);
    let b = TTTensor::zeros(&[3, 3]);
    let (x, report) = amen_solve(&a, &b, &SolveOptions::default(), None).unwrap();
    assert!(report.converged);
    assert_eq!(report.sweeps, 0);
    assert_eq!(x.norm(), 0.0);
}

#[test]
fn shape_and_option_validation() {
    let a = TTMatrix::identity(&[4, 4]);
    let b = TTTensor::ones(&[4, 3]);
    assert!(matches!(
        amen_solve(&a, &b, &SolveOptions::default(), None),
        Err(SolveError::ShapeMismatch(_))
    ));
    let b2 = TTTensor::ones(&[4, 4]);
    let bad = SolveOptions {
        eps: 0.0,
        ..SolveOptions::default()
    };
    assert!(matches!(
        amen_solve(&a, &b2, &bad, None),
        Err(SolveError::BadOptions(_))
    ));
}

#[test]
fn report_log_has_one_line_per_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let shape = [5, 5, 5];
    let a = random_spd(&shape, 2, &mut rng);
    let b = TTTensor::random_with(&shape, 2, || rng.gen_range(-1.0..1.0));
    let (_, report) = amen_solve(&a, &b, &SolveOptions::default(), None).unwrap();
    let log = report.to_log();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines.len(), report.sweeps);
    for (i, line) in lines.iter().enumerate() {
        let parts: Vec<&str> = line.split(',').collect();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0].parse::<usize>().unwrap(), i + 1);
        assert!(parts[1].parse::<f64>().unwrap().is_finite());
        assert_eq!(
            parts[2].parse::<usize>().unwrap(),
            report.rank_history[i]
        );
    }
}
