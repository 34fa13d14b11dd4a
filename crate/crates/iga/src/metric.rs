//! Jacobian algebra on the quadrature grid.
//!
//! From the fitted control points, the nine tensors `J[s][t] = d x_s / d y_t`
//! are obtained by univariate collocation along each spatial mode. The
//! Jacobian determinant `omega`, its entrywise reciprocal, and the weighted
//! inverse-metric entries `K[a][b] = sum_c adj(J)[a][c] adj(J)[b][c] / omega`
//! are then pure tensor algebra. The inverse Jacobian is never formed by
//! itself: the only division is the one reciprocal of `omega`.

use ndarray::{s, Array2, Array3, Array4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splines::QuadratureGrid;
use tt_core::linalg::svd_trunc;
use tt_core::TTTensor;
use tt_solve::{tt_reciprocal, SolveOptions};

use crate::error::{IgaError, Result};
use crate::geometry::GeometryMap;
use crate::modes::{mm, mode_apply};

#[derive(Debug, Clone)]
pub struct MetricOptions {
    /// Rounding tolerance for the intermediate tensor algebra.
    pub eps: f64,
    /// Tolerance for the determinant reciprocal solve.
    pub recip_eps: f64,
    pub recip_max_rank: usize,
    /// Random entries checked for determinant positivity.
    pub det_samples: usize,
    pub seed: u64,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self { eps: 1e-10, recip_eps: 1e-8, recip_max_rank: 200, det_samples: 10_000, seed: 0xde7 }
    }
}

/// Per-dimension quadrature and basis evaluation tables.
pub(crate) struct BasisTable {
    /// First nonzero basis index per quadrature point.
    pub start: Vec<usize>,
    /// The `p + 1` nonzero basis values per quadrature point.
    pub val: Vec<Vec<f64>>,
    pub der: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub n: usize,
}

/// Geometry factors entering the Galerkin integrals, all living on the
/// tensor grid `quadrature points x parameter nodes`.
pub struct Metric {
    quads: [QuadratureGrid; 3],
    pub(crate) tables: [BasisTable; 3],
    jac: [[TTTensor; 3]; 3],
    omega: TTTensor,
    omega_inv: TTTensor,
    kmat: Vec<TTTensor>,
    min_sampled_det: f64,
}

impl Metric {
    pub fn quad(&self, k: usize) -> &QuadratureGrid {
        &self.quads[k]
    }

    /// `d x_s / d y_t` on the quadrature grid.
    pub fn jacobian(&self, s: usize, t: usize) -> &TTTensor {
        &self.jac[s][t]
    }

    /// Jacobian determinant on the quadrature grid.
    pub fn omega(&self) -> &TTTensor {
        &self.omega
    }

    pub fn omega_inv(&self) -> &TTTensor {
        &self.omega_inv
    }

    /// Weighted inverse metric `sum_c adj(J)[a][c] adj(J)[b][c] / omega`.
    pub fn kmat(&self, a: usize, b: usize) -> &TTTensor {
        &self.kmat[sym_index(a, b)]
    }

    /// Smallest determinant value seen by the positivity sampling.
    pub fn min_sampled_det(&self) -> f64 {
        self.min_sampled_det
    }
}

fn sym_index(a: usize, b: usize) -> usize {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
    match (lo, hi) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Hadamard product with on-the-fly truncation. The plain product has
/// bond ranks `r_a * r_b`; forming it explicitly is wasteful exactly when
/// both factors carry real rank, so the product cores are compressed as
/// they are built, left to right, and the result is certified by a final
/// canonical rounding.
pub fn hadamard_rounded(a: &TTTensor, b: &TTTensor, eps: f64) -> Result<TTTensor> {
    let shape = a.shape();
    if shape != b.shape() {
        return Err(IgaError::Invalid("hadamard of mismatched shapes".into()));
    }
    let d = shape.len();
    let split_tol = if d > 1 { eps / ((d - 1) as f64).sqrt() } else { eps };
    let mut cores: Vec<Array3<f64>> = Vec::with_capacity(d);
    let mut carry = Array2::from_elem((1, 1), 1.0);
    for k in 0..d {
        let ak = &a.cores()[k];
        let bk = &b.cores()[k];
        let (ra, n, ra2) = ak.dim();
        let (rb, _, rb2) = bk.dim();
        let rc = carry.nrows();
        // X[cb, ia'] = sum_a carry[c, (a, b)] A[a, (i, a')]
        let c3 = carry
            .into_shape_with_order((rc, ra, rb))
            .expect("carry sized by construction")
            .permuted_axes([0, 2, 1])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((rc * rb, ra))
            .expect("contiguous");
        let a2 = ak
            .view()
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((ra, n * ra2))
            .expect("contiguous");
        let x = mm(c3.view(), a2.view())
            .into_shape_with_order((rc, rb, n, ra2))
            .expect("sized by construction");
        let mut t = Array4::<f64>::zeros((rc, n, ra2, rb2));
        for i in 0..n {
            let xi = x
                .slice(s![.., .., i, ..])
                .permuted_axes([0, 2, 1])
                .as_standard_layout()
                .into_owned()
                .into_shape_with_order((rc * ra2, rb))
                .expect("contiguous");
            let bi = bk.slice(s![.., i, ..]);
            let ti = mm(xi.view(), bi)
                .into_shape_with_order((rc, ra2, rb2))
                .expect("sized by construction");
            t.slice_mut(s![.., i, .., ..]).assign(&ti);
        }
        let m = t
            .into_shape_with_order((rc * n, ra2 * rb2))
            .expect("contiguous");
        if k + 1 == d {
            cores.push(
                m.into_shape_with_order((rc, n, 1))
                    .expect("boundary ranks are 1"),
            );
            carry = Array2::from_elem((1, 1), 1.0);
        } else {
            let mnorm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            let (u, sv, vt) = svd_trunc(m.view(), split_tol * mnorm, None);
            let r = sv.len();
            cores.push(
                u.into_shape_with_order((rc, n, r))
                    .expect("sized by construction"),
            );
            let mut scaled = vt;
            for (i, &si) in sv.iter().enumerate() {
                scaled.row_mut(i).mapv_inplace(|v| v * si);
            }
            carry = scaled;
        }
    }
    let _ = carry;
    Ok(TTTensor::new(cores)?.round(eps))
}

fn basis_table(basis: &splines::BSplineBasis, quad: &QuadratureGrid) -> Result<BasisTable> {
    let mut start = Vec::with_capacity(quad.len());
    let mut val = Vec::with_capacity(quad.len());
    let mut der = Vec::with_capacity(quad.len());
    for &x in quad.points() {
        let (s0, v) = basis.eval_nonzero(x)?;
        let (s1, dv) = basis.eval_nonzero_deriv(x)?;
        debug_assert_eq!(s0, s1);
        start.push(s0);
        val.push(v);
        der.push(dv);
    }
    Ok(BasisTable {
        start,
        val,
        der,
        weights: quad.weights().to_vec(),
        n: basis.len(),
    })
}

/// Dense collocation matrix (quad points x basis size) from a table.
fn table_matrix(t: &BasisTable, deriv: bool) -> Array2<f64> {
    let mut m = Array2::zeros((t.start.len(), t.n));
    for (j, &s0) in t.start.iter().enumerate() {
        let row = if deriv { &t.der[j] } else { &t.val[j] };
        for (a, &v) in row.iter().enumerate() {
            m[(j, s0 + a)] = v;
        }
    }
    m
}

pub fn build_metric(geo: &GeometryMap, opts: &MetricOptions) -> Result<Metric> {
    let bases = geo.bases();
    let quads: [QuadratureGrid; 3] = [
        QuadratureGrid::for_basis(&bases[0]),
        QuadratureGrid::for_basis(&bases[1]),
        QuadratureGrid::for_basis(&bases[2]),
    ];
    let tables: [BasisTable; 3] = [
        basis_table(&bases[0], &quads[0])?,
        basis_table(&bases[1], &quads[1])?,
        basis_table(&bases[2], &quads[2])?,
    ];
    let vals: Vec<Array2<f64>> = tables.iter().map(|t| table_matrix(t, false)).collect();
    let ders: Vec<Array2<f64>> = tables.iter().map(|t| table_matrix(t, true)).collect();

    // J[s][t]: collocate component s, differentiating along mode t.
    let mut jac: Vec<Vec<TTTensor>> = Vec::with_capacity(3);
    for s in 0..3 {
        let mut row = Vec::with_capacity(3);
        for t in 0..3 {
            let mut cur = geo.control(s).clone();
            for k in 0..3 {
                let m = if k == t { &ders[k] } else { &vals[k] };
                cur = mode_apply(&cur, k, m.view())?;
            }
            row.push(cur.round(opts.eps));
        }
        jac.push(row);
    }

    // Determinant as the signed sum over column permutations.
    let eps = opts.eps;
    let perm_term = |c0: usize, c1: usize, c2: usize| -> Result<TTTensor> {
        let p = hadamard_rounded(&jac[0][c0], &jac[1][c1], eps)?;
        hadamard_rounded(&p, &jac[2][c2], eps)
    };
    let mut omega = perm_term(0, 1, 2)?;
    omega = omega.add(&perm_term(1, 2, 0)?)?;
    omega = omega.add(&perm_term(2, 0, 1)?)?;
    omega = omega.add(&perm_term(2, 1, 0)?.scale(-1.0))?;
    omega = omega.add(&perm_term(0, 2, 1)?.scale(-1.0))?;
    omega = omega.add(&perm_term(1, 0, 2)?.scale(-1.0))?;
    let omega = omega.round(eps);

    let min_sampled_det = sample_min(&omega, opts.det_samples, opts.seed);
    if min_sampled_det <= 0.0 {
        return Err(IgaError::Degenerate(format!(
            "jacobian determinant reaches {min_sampled_det:.3e} on the quadrature grid"
        )));
    }

    let solve_opts = SolveOptions {
        eps: opts.recip_eps,
        max_rank: opts.recip_max_rank,
        ..SolveOptions::default()
    };
    let omega_inv = tt_reciprocal(&omega, opts.recip_eps, &solve_opts).map_err(|e| {
        IgaError::Degenerate(format!("determinant reciprocal did not converge: {e}"))
    })?;

    // adj(J)[t][s]: cofactor expansion through cyclic index shifts.
    let adj_entry = |t: usize, s: usize| -> Result<TTTensor> {
        let (s1, s2) = ((s + 1) % 3, (s + 2) % 3);
        let (t1, t2) = ((t + 1) % 3, (t + 2) % 3);
        let pos = hadamard_rounded(&jac[s1][t1], &jac[s2][t2], eps)?;
        let neg = hadamard_rounded(&jac[s1][t2], &jac[s2][t1], eps)?;
        Ok(pos.sub(&neg)?.round(eps))
    };
    let mut adj: Vec<Vec<TTTensor>> = Vec::with_capacity(3);
    for t in 0..3 {
        let mut row = Vec::with_capacity(3);
        for s in 0..3 {
            row.push(adj_entry(t, s)?);
        }
        adj.push(row);
    }

    let mut kmat = Vec::with_capacity(6);
    for a in 0..3 {
        for b in a..3 {
            let mut acc = hadamard_rounded(&adj[a][0], &adj[b][0], eps)?;
            for c in 1..3 {
                acc = acc.add(&hadamard_rounded(&adj[a][c], &adj[b][c], eps)?)?;
            }
            let acc = acc.round(eps);
            kmat.push(hadamard_rounded(&acc, &omega_inv, eps)?);
        }
    }

    Ok(Metric {
        quads,
        tables,
        jac: jac
            .into_iter()
            .map(|r| <[TTTensor; 3]>::try_from(r).expect("three entries"))
            .collect::<Vec<_>>()
            .try_into()
            .map_err(|_| IgaError::Invalid("jacobian rows".into()))?,
        omega,
        omega_inv,
        kmat,
        min_sampled_det,
    })
}

fn sample_min(t: &TTTensor, samples: usize, seed: u64) -> f64 {
    let shape = t.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    for _ in 0..samples.max(1) {
        let idx: Vec<usize> = shape.iter().map(|&n| rng.gen_range(0..n)).collect();
        min = min.min(t.entry(&idx));
    }
    min
}
