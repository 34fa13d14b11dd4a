//! Knot layouts, evaluation identities, and Greville points, pinned against
//! hand-computed values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splines::{BSplineBasis, KnotVector};

#[test]
fn uniform_open_knot_layouts() {
    let kv = KnotVector::open_uniform(5, 1).unwrap();
    assert_eq!(kv.knots(), &[0.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.0]);

    let kv = KnotVector::open_uniform(6, 2).unwrap();
    assert_eq!(
        kv.knots(),
        &[0.0, 0.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.0, 1.0]
    );
}

#[test]
fn doubled_interior_knot_layout() {
    let kv = KnotVector::open_with_multiplicities(7, 2, &[(0.5, 2)]).unwrap();
    assert_eq!(
        kv.knots(),
        &[0.0, 0.0, 0.0, 0.25, 0.5, 0.5, 0.75, 1.0, 1.0, 1.0]
    );
    assert_eq!(kv.breakpoints(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn knot_validation_rejects_bad_inputs() {
    assert!(KnotVector::open_uniform(2, 2).is_err());
    // Multiplicity above p.
    assert!(KnotVector::open_with_multiplicities(8, 2, &[(0.5, 3)]).is_err());
    // Off-grid raised knot.
    assert!(KnotVector::open_with_multiplicities(7, 2, &[(0.3, 2)]).is_err());
    // More extra knots than interior slots.
    assert!(KnotVector::open_with_multiplicities(4, 2, &[(0.5, 2)]).is_err());
    // Explicit list with broken clamping.
    assert!(KnotVector::from_knots(vec![0.0, 0.1, 0.5, 1.0, 1.0], 1).is_err());
}

#[test]
fn clamped_basis_interpolates_at_zero() {
    for (n, p) in [(5, 1), (6, 2), (9, 3)] {
        let b = BSplineBasis::open_uniform(n, p).unwrap();
        let vals = b.eval_all(0.0).unwrap();
        assert_eq!(vals[0], 1.0);
        assert!(vals[1..].iter().all(|&v| v == 0.0));
        let vals = b.eval_all(1.0).unwrap();
        assert_eq!(vals[n - 1], 1.0);
        assert!(vals[..n - 1].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn hat_functions_split_evenly_at_midspan() {
    let b = BSplineBasis::open_uniform(5, 1).unwrap();
    let vals = b.eval_all(0.375).unwrap();
    let want = [0.0, 0.5, 0.5, 0.0, 0.0];
    for (v, w) in vals.iter().zip(want) {
        assert!((v - w).abs() < 1e-15, "{vals:?}");
    }
}

#[test]
fn partition_of_unity_and_derivative_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let bases = [
        BSplineBasis::open_uniform(6, 2).unwrap(),
        BSplineBasis::open_uniform(13, 3).unwrap(),
        BSplineBasis::open_with_multiplicities(7, 2, &[(0.5, 2)]).unwrap(),
        BSplineBasis::open_with_multiplicities(17, 4, &[(0.2, 3), (0.6, 2)]).unwrap(),
    ];
    for b in &bases {
        for _ in 0..1000 {
            let x: f64 = rng.gen();
            let s: f64 = b.eval_all(x).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "sum {s} at {x}");
            let ds: f64 = b.eval_all_deriv(x).unwrap().iter().sum();
            assert!(ds.abs() < 1e-12, "derivative sum {ds} at {x}");
        }
    }
}

#[test]
fn at_most_p_plus_one_nonzeros() {
    let b = BSplineBasis::open_uniform(11, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..200 {
        let x: f64 = rng.gen();
        let nz = b.eval_all(x).unwrap().iter().filter(|&&v| v != 0.0).count();
        assert!(nz <= 4);
        let (_, vals) = b.eval_nonzero(x).unwrap();
        assert_eq!(vals.len(), 4);
        assert!(vals.iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn derivatives_match_central_differences() {
    let b = BSplineBasis::open_with_multiplicities(10, 3, &[(0.5, 2)]).unwrap();
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..100 {
        let x: f64 = rng.gen_range(2.0 * h..1.0 - 2.0 * h);
        let ders = b.eval_all_deriv(x).unwrap();
        let up = b.eval_all(x + h).unwrap();
        let dn = b.eval_all(x - h).unwrap();
        for k in 0..b.len() {
            let fd = (up[k] - dn[k]) / (2.0 * h);
            assert!(
                (ders[k] - fd).abs() < 5e-5 * ders[k].abs().max(1.0),
                "k = {k}, x = {x}: {} vs {fd}",
                ders[k]
            );
        }
    }
}

#[test]
fn domain_is_enforced() {
    let b = BSplineBasis::open_uniform(5, 2).unwrap();
    assert!(b.eval_all(-0.01).is_err());
    assert!(b.eval_all(1.01).is_err());
    assert!(b.eval_all_deriv(f64::NAN).is_err());
}

#[test]
fn greville_points_for_degree_one_follow_the_knots() {
    let b = BSplineBasis::open_uniform(5, 1).unwrap();
    assert_eq!(b.greville(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn greville_points_for_degree_two_are_knot_means() {
    let b = BSplineBasis::open_uniform(6, 2).unwrap();
    let want = [0.0, 0.125, 0.375, 0.625, 0.875, 1.0];
    for (g, w) in b.greville().iter().zip(want) {
        assert!((g - w).abs() < 1e-15);
    }
}

#[test]
fn greville_endpoints_are_clamped() {
    for (n, p, raised) in [
        (7usize, 2usize, vec![]),
        (10, 3, vec![(0.5, 2usize)]),
        (12, 4, vec![(0.25, 4), (0.75, 2)]),
    ] {
        let b = BSplineBasis::open_with_multiplicities(n, p, &raised).unwrap();
        let g = b.greville();
        assert_eq!(g.len(), n);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[n - 1], 1.0);
        assert!(g.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn doubled_knot_drops_derivative_continuity() {
    // With an interior knot at multiplicity p = 2 the spline stays C^0 but
    // its first derivative may jump at the knot; with a simple knot the
    // derivative is continuous.
    let coeffs = [0.3, -1.0, 2.0, 0.7, -0.4, 1.5, 0.2];
    let eval = |b: &BSplineBasis, x: f64| -> (f64, f64) {
        let v = b.eval_all(x).unwrap();
        let d = b.eval_all_deriv(x).unwrap();
        (
            v.iter().zip(&coeffs).map(|(a, c)| a * c).sum(),
            d.iter().zip(&coeffs).map(|(a, c)| a * c).sum(),
        )
    };
    let eps = 1e-9;

    let doubled = BSplineBasis::open_with_multiplicities(7, 2, &[(0.5, 2)]).unwrap();
    let (v_lo, d_lo) = eval(&doubled, 0.5 - eps);
    let (v_hi, d_hi) = eval(&doubled, 0.5 + eps);
    assert!((v_lo - v_hi).abs() < 1e-7, "value must stay continuous");
    assert!((d_lo - d_hi).abs() > 0.1, "derivative should jump");

    let simple = BSplineBasis::open_uniform(7, 2).unwrap();
    let (_, d_lo) = eval(&simple, 0.4 - eps);
    let (_, d_hi) = eval(&simple, 0.4 + eps);
    assert!((d_lo - d_hi).abs() < 1e-6, "derivative continuous at simple knot");
}
