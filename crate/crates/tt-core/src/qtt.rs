//! Quantized reshapes: splitting each TT mode into its prime factors (or any
//! chosen factorization) to expose finer-grained low-rank structure, and the
//! exact inverse merge.

use ndarray::Array3;

use crate::error::{Result, TtError};
use crate::linalg;
use crate::matrix::TTMatrix;
use crate::tensor::TTTensor;

/// Relative cutoff for the exact split SVDs. Splitting a core is a pure
/// reshape, so the only singular values dropped at this level are numerical
/// zeros.
const SPLIT_CUTOFF: f64 = 1e-14;

/// Prime factorization in ascending order; `prime_factors(12) == [2, 2, 3]`.
pub fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2usize;
    while p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Per-mode factorizations used by the quantized reshape. `factors[k]` lists
/// the sub-mode sizes of mode `k`, slowest digit first, and must multiply
/// back to the original mode size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QttFactorization {
    pub factors: Vec<Vec<usize>>,
}

impl QttFactorization {
    /// Fully split factorization: every mode becomes its ascending prime
    /// factors. A mode of size 1 stays a single factor of 1.
    pub fn maximal(shape: &[usize]) -> Self {
        let factors = shape
            .iter()
            .map(|&n| {
                let f = prime_factors(n);
                if f.is_empty() {
                    vec![1]
                } else {
                    f
                }
            })
            .collect();
        Self { factors }
    }

    pub fn from_factors(factors: Vec<Vec<usize>>) -> Self {
        Self { factors }
    }

    pub fn validate(&self, shape: &[usize]) -> Result<()> {
        if self.factors.len() != shape.len() {
            return Err(TtError::ShapeMismatch(format!(
                "{} factor groups for {} modes",
                self.factors.len(),
                shape.len()
            )));
        }
        for (k, (fs, &n)) in self.factors.iter().zip(shape).enumerate() {
            // Factors of 1 would create spurious unit modes; the only one
            // allowed is the sole factor of a unit mode.
            let unit_mode = n == 1 && fs.as_slice() == [1];
            if fs.is_empty() || (!unit_mode && fs.iter().any(|&f| f < 2)) {
                return Err(TtError::InvalidArgument(format!(
                    "mode {k}: factors must be >= 2, got {fs:?}"
                )));
            }
            let prod: usize = fs.iter().product();
            if prod != n {
                return Err(TtError::ShapeMismatch(format!(
                    "mode {k}: factors {fs:?} multiply to {prod}, mode size is {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn flat_shape(&self) -> Vec<usize> {
        self.factors.iter().flatten().copied().collect()
    }
}

/// Splits one order-3 core `(r, n, r')` into a chain of cores over the given
/// factors of `n`. The split is a reshape of the core, so it is exact up to
/// floating-point roundoff.
fn split_core3(core: &Array3<f64>, factors: &[usize]) -> Vec<Array3<f64>> {
    if factors.len() == 1 {
        return vec![core.clone()];
    }
    let (r, _, r2) = (core.shape()[0], core.shape()[1], core.shape()[2]);
    let mut out = Vec::with_capacity(factors.len());
    let total = core.len();
    let mut cur = core
        .clone()
        .into_shape_with_order((1, total))
        .expect("contiguous");
    let mut left = r;
    let mut remaining: usize = factors.iter().product::<usize>() * r2;
    // Rows of each unfolding are (left * f); the absolute cutoff is relative
    // to the full core norm so exact zeros are the only casualties.
    let norm: f64 = core.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = SPLIT_CUTOFF * norm;
    for (i, &f) in factors.iter().enumerate() {
        remaining /= f;
        if i + 1 == factors.len() {
            let last = cur
                .into_shape_with_order((left, f, r2))
                .expect("contiguous");
            out.push(last);
            break;
        }
        let m = cur
            .into_shape_with_order((left * f, remaining))
            .expect("contiguous");
        let (u, s, vt) = linalg::svd_trunc(m.view(), tol, None);
        let rk = s.len();
        out.push(
            u.into_shape_with_order((left, f, rk))
                .expect("contiguous"),
        );
        let mut sv = vt;
        for (j, &sj) in s.iter().enumerate() {
            sv.row_mut(j).mapv_inplace(|v| v * sj);
        }
        left = rk;
        cur = sv
            .into_shape_with_order((1, rk * remaining))
            .expect("contiguous");
    }
    out
}

/// Merges a chain of cores back into one core over the product mode. Exact:
/// only matrix products are involved.
fn merge_cores3(cores: &[Array3<f64>]) -> Array3<f64> {
    let mut acc = cores[0].clone();
    for c in &cores[1..] {
        let (r, n, mid) = (acc.shape()[0], acc.shape()[1], acc.shape()[2]);
        let (_, f, r2) = (c.shape()[0], c.shape()[1], c.shape()[2]);
        let a = acc
            .into_shape_with_order((r * n, mid))
            .expect("contiguous");
        let b = c
            .view()
            .into_shape_with_order((mid, f * r2))
            .expect("contiguous");
        acc = a
            .dot(&b)
            .into_shape_with_order((r, n * f, r2))
            .expect("contiguous");
    }
    acc
}

/// Quantized reshape of a TT tensor: each mode is split into the factors of
/// `fact`, then the whole train is rounded at `eps` (relative Frobenius).
/// With `eps = 0` the result is the exact reshape.
pub fn qtt_reshape(t: &TTTensor, fact: &QttFactorization, eps: f64) -> Result<TTTensor> {
    fact.validate(&t.shape())?;
    let mut cores = Vec::new();
    for (core, fs) in t.cores().iter().zip(&fact.factors) {
        cores.extend(split_core3(core, fs));
    }
    let out = TTTensor::new(cores)?;
    if eps > 0.0 {
        Ok(out.round(eps))
    } else {
        Ok(out)
    }
}

/// Inverse of [`qtt_reshape`]: merges consecutive cores back into the
/// original modes. Exact up to roundoff; ranks at the surviving bonds are
/// unchanged.
pub fn qtt_unreshape(t: &TTTensor, fact: &QttFactorization) -> Result<TTTensor> {
    if t.shape() != fact.flat_shape() {
        return Err(TtError::ShapeMismatch(format!(
            "tensor shape {:?} does not match factor list {:?}",
            t.shape(),
            fact.flat_shape()
        )));
    }
    let mut cores = Vec::with_capacity(fact.factors.len());
    let mut pos = 0usize;
    for fs in &fact.factors {
        cores.push(merge_cores3(&t.cores()[pos..pos + fs.len()]));
        pos += fs.len();
    }
    TTTensor::new(cores)
}

/// Quantized reshape of a TT operator. Row and column digits of each mode
/// are interleaved (`f_1, g_1, f_2, g_2, ...`) so that every split core is
/// again an operator core over one row digit and one column digit. Both
/// shapes must admit the same factorization, which `fact` describes.
pub fn qtt_reshape_matrix(a: &TTMatrix, fact: &QttFactorization, eps: f64) -> Result<TTMatrix> {
    fact.validate(&a.row_shape())?;
    fact.validate(&a.col_shape())?;
    let mut cores = Vec::new();
    for (core, fs) in a.cores().iter().zip(&fact.factors) {
        let (r, m, n, r2) = {
            let s = core.shape();
            (s[0], s[1], s[2], s[3])
        };
        let parts = fs.len();
        if parts == 1 {
            cores.push(
                core.clone()
                    .into_shape_with_order((r, m * n, r2))
                    .expect("contiguous"),
            );
            continue;
        }
        // (r, f_1..f_p, g_1..g_p, r') with digits of m slowest-first, then
        // interleave row and column digits.
        let mut dims = vec![r];
        dims.extend(fs.iter().copied());
        dims.extend(fs.iter().copied());
        dims.push(r2);
        let nd = core
            .clone()
            .into_dyn()
            .into_shape_with_order(dims.as_slice())
            .expect("contiguous");
        let mut perm = Vec::with_capacity(2 * parts + 2);
        perm.push(0);
        for i in 0..parts {
            perm.push(1 + i);
            perm.push(1 + parts + i);
        }
        perm.push(1 + 2 * parts);
        let nd = nd.permuted_axes(perm.as_slice());
        let nd = nd.as_standard_layout().into_owned();
        let fused_factors: Vec<usize> = fs.iter().map(|&f| f * f).collect();
        let fused_total: usize = fused_factors.iter().product();
        let merged = nd
            .into_shape_with_order((r, fused_total, r2))
            .expect("contiguous");
        cores.extend(split_core3(&merged, &fused_factors));
    }
    let fused = TTTensor::new(cores)?;
    let flat = fact.flat_shape();
    let out = TTMatrix::from_fused_tensor(&fused, &flat, &flat)?;
    if eps > 0.0 {
        Ok(out.round(eps))
    } else {
        Ok(out)
    }
}

/// Inverse of [`qtt_reshape_matrix`].
pub fn qtt_unreshape_matrix(a: &TTMatrix, fact: &QttFactorization) -> Result<TTMatrix> {
    let flat = fact.flat_shape();
    if a.row_shape() != flat || a.col_shape() != flat {
        return Err(TtError::ShapeMismatch(
            "operator shape does not match factor list".into(),
        ));
    }
    let fused: Vec<Array3<f64>> = a
        .cores()
        .iter()
        .map(|c| {
            let s = c.shape();
            c.clone()
                .into_shape_with_order((s[0], s[1] * s[2], s[3]))
                .expect("contiguous")
        })
        .collect();
    let mut cores = Vec::with_capacity(fact.factors.len());
    let mut pos = 0usize;
    for fs in &fact.factors {
        let merged = merge_cores3(&fused[pos..pos + fs.len()]);
        pos += fs.len();
        let (r, _, r2) = (merged.shape()[0], merged.shape()[1], merged.shape()[2]);
        let parts = fs.len();
        let m: usize = fs.iter().product();
        if parts == 1 {
            cores.push(
                merged
                    .into_shape_with_order((r, m, m, r2))
                    .expect("contiguous"),
            );
            continue;
        }
        // Un-interleave (f_1, g_1, ..., f_p, g_p) -> (f_1..f_p, g_1..g_p).
        let mut dims = vec![r];
        for &f in fs {
            dims.push(f);
            dims.push(f);
        }
        dims.push(r2);
        let nd = merged
            .into_dyn()
            .into_shape_with_order(dims.as_slice())
            .expect("contiguous");
        let mut perm = Vec::with_capacity(2 * parts + 2);
        perm.push(0);
        for i in 0..parts {
            perm.push(1 + 2 * i);
        }
        for i in 0..parts {
            perm.push(2 + 2 * i);
        }
        perm.push(1 + 2 * parts);
        let nd = nd.permuted_axes(perm.as_slice());
        let nd = nd.as_standard_layout().into_owned();
        cores.push(
            nd.into_shape_with_order((r, m, m, r2))
                .expect("contiguous"),
        );
    }
    TTMatrix::new(cores)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_factors_ascend() {
        assert_eq!(prime_factors(12), vec![2, 2, 3]);
        assert_eq!(prime_factors(1), Vec::<usize>::new());
        assert_eq!(prime_factors(97), vec![97]);
        assert_eq!(prime_factors(360), vec![2, 2, 2, 3, 3, 5]);
    }

    #[test]
    fn maximal_factorization_keeps_unit_modes() {
        let f = QttFactorization::maximal(&[12, 1, 7]);
        assert_eq!(f.factors, vec![vec![2, 2, 3], vec![1], vec![7]]);
        f.validate(&[12, 1, 7]).unwrap();
        assert!(f.validate(&[12, 1, 8]).is_err());
    }

    #[test]
    fn split_then_merge_restores_core() {
        let core = Array3::from_shape_fn((2, 12, 3), |(a, i, b)| {
            (a as f64 + 1.0) * (i as f64).sin() + b as f64 * 0.3
        });
        let parts = split_core3(&core, &[2, 2, 3]);
        assert_eq!(parts.len(), 3);
        let back = merge_cores3(&parts);
        let err: f64 = (&back - &core).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(err < 1e-12 * core.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
}
