//! Galerkin operators on the joint spatial-parameter grid, in TT matrix
//! form.
//!
//! Every operator is a weighted gram matrix: a weight tensor on the
//! quadrature-times-parameter grid contracted against per-mode basis value
//! (or derivative) tables. The weight's TT cores pass through mode by mode,
//! so the operator inherits the weight's ranks; the parameter modes become
//! diagonal blocks because nothing couples different parameter nodes.

use ndarray::{s, Array3, Array4};
use tt_core::{TTMatrix, TTTensor};

use crate::error::Result;
use crate::metric::{hadamard_rounded, BasisTable, Metric};

/// `out[r, m, k, r'] = sum_j w_j rows_j(m) cols_j(k) t[r, j, r']`, banded in
/// `|m - k|` by the basis support.
fn gram_core(
    tcore: &Array3<f64>,
    table: &BasisTable,
    row_deriv: bool,
    col_deriv: bool,
) -> Array4<f64> {
    let (r, nq, r2) = tcore.dim();
    let n = table.n;
    let mut out = Array4::zeros((r, n, n, r2));
    for j in 0..nq {
        let s0 = table.start[j];
        let rv = if row_deriv { &table.der[j] } else { &table.val[j] };
        let cv = if col_deriv { &table.der[j] } else { &table.val[j] };
        let w = table.weights[j];
        let tj = tcore.slice(s![.., j, ..]);
        for (a, &ra) in rv.iter().enumerate() {
            let wa = w * ra;
            if wa == 0.0 {
                continue;
            }
            for (b, &cb) in cv.iter().enumerate() {
                let coeff = wa * cb;
                if coeff != 0.0 {
                    out.slice_mut(s![.., s0 + a, s0 + b, ..]).scaled_add(coeff, &tj);
                }
            }
        }
    }
    out
}

/// Parameter-mode core of any assembled operator: the diagonal block
/// `delta_{iq}` carrying the weight's values at the parameter nodes.
fn diag_core(tcore: &Array3<f64>) -> Array4<f64> {
    let (r, l, r2) = tcore.dim();
    let mut out = Array4::zeros((r, l, l, r2));
    for i in 0..l {
        out.slice_mut(s![.., i, i, ..]).assign(&tcore.slice(s![.., i, ..]));
    }
    out
}

/// Gram matrix of the given weight; `row_deriv[k]`/`col_deriv[k]` switch
/// mode `k` to derivative collocation.
fn weighted_gram(
    weight: &TTTensor,
    metric: &Metric,
    row_deriv: [bool; 3],
    col_deriv: [bool; 3],
) -> Result<TTMatrix> {
    let d = weight.shape().len();
    let mut cores = Vec::with_capacity(d);
    for k in 0..3 {
        cores.push(gram_core(
            &weight.cores()[k],
            &metric.tables[k],
            row_deriv[k],
            col_deriv[k],
        ));
    }
    for k in 3..d {
        cores.push(diag_core(&weight.cores()[k]));
    }
    Ok(TTMatrix::new(cores)?)
}

/// Mass matrix `int b_m b_k omega`.
pub fn assemble_mass(metric: &Metric, eps: f64) -> Result<TTMatrix> {
    Ok(weighted_gram(metric.omega(), metric, [false; 3], [false; 3])?.round(eps))
}

/// Stiffness matrix `int kappa grad b_m . grad b_k` in physical
/// coordinates: nine reference-gradient pairings weighted by the inverse
/// metric. `kappa` lives on the quadrature grid; `None` means 1.
pub fn assemble_stiffness(
    metric: &Metric,
    kappa: Option<&TTTensor>,
    geom_eps: f64,
    eps: f64,
) -> Result<TTMatrix> {
    let mut total: Option<TTMatrix> = None;
    for a in 0..3 {
        for b in 0..3 {
            let weight = match kappa {
                Some(k) => hadamard_rounded(metric.kmat(a, b), k, geom_eps)?,
                None => metric.kmat(a, b).clone(),
            };
            let mut rd = [false; 3];
            let mut cd = [false; 3];
            rd[a] = true;
            cd[b] = true;
            let term = weighted_gram(&weight, metric, rd, cd)?;
            total = Some(match total {
                None => term,
                Some(acc) => acc.add(&term)?.round(eps),
            });
        }
    }
    Ok(total.expect("nine pairings"))
}
