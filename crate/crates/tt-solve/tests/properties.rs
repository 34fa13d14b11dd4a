//! Randomized agreement between the rank-adaptive solver and dense LU.

use ndarray::Array1;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tt_core::{linalg, TTMatrix, TTTensor};
use tt_solve::{amen_solve, SolveOptions};

fn shapes() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..5, 2..4)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 10,
        ..ProptestConfig::default()
    })]

    #[test]
    fn solves_random_well_conditioned_systems(shape in shapes(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = TTMatrix::random_with(&shape, &shape, 2, || rng.gen_range(-0.5..0.5)).unwrap();
        let sym = r.transpose().matmul(&r).unwrap().round(1e-14);
        let shift = 0.2 * sym.to_fused_tensor().norm().max(1e-6);
        let a = sym
            .add(&TTMatrix::identity(&shape).scale(shift))
            .unwrap()
            .round(1e-14);
        let b = TTTensor::random_with(&shape, 2, || rng.gen_range(-1.0..1.0));

        let eps = 1e-8;
        let opts = SolveOptions { eps, ..SolveOptions::default() };
        let (x, report) = amen_solve(&a, &b, &opts, None).unwrap();
        prop_assert!(report.converged, "residual {:.3e}", report.residual);

        let ad = a.full_matrix().unwrap();
        let bd = b.to_dense().unwrap();
        let want = linalg::solve_lu(ad.view(), bd.data()).unwrap();
        let got = Array1::from(x.to_dense().unwrap().data().to_vec());
        let diff = &got - &want;
        let rel = diff.dot(&diff).sqrt() / want.dot(&want).sqrt();
        prop_assert!(rel <= 1e-7, "deviation from dense solve {rel:.3e}");

        let res = ad.dot(&got) - &Array1::from(bd.data().to_vec());
        let bn = bd.norm();
        prop_assert!(res.dot(&res).sqrt() / bn <= 1.5 * eps);
    }
}
