use ndarray::{Array2, Array3, ArrayView2, Axis};

use crate::dense::DenseTensor;
use crate::error::{Result, TtError};
use crate::linalg;
use crate::DEFAULT_DENSE_BUDGET;

/// Tensor in tensor-train format.
///
/// Core `k` has shape `(r_{k-1}, n_k, r_k)` with `r_0 = r_d = 1`; an entry is
/// the chain product of the per-mode matrix slices. Cores are stored in the
/// same last-index-fastest layout as [`DenseTensor`].
#[derive(Debug, Clone)]
pub struct TTTensor {
    cores: Vec<Array3<f64>>,
}

pub(crate) fn mat2(a: &Array3<f64>, rows: usize, cols: usize) -> ArrayView2<'_, f64> {
    a.view()
        .into_shape_with_order((rows, cols))
        .expect("core buffers are contiguous")
}

fn owned3(a: Array2<f64>, s0: usize, s1: usize, s2: usize) -> Array3<f64> {
    a.into_shape_with_order((s0, s1, s2))
        .expect("gemm output is contiguous")
}

impl TTTensor {
    pub fn new(cores: Vec<Array3<f64>>) -> Result<Self> {
        if cores.is_empty() {
            return Err(TtError::InvalidArgument("empty core list".into()));
        }
        if cores[0].shape()[0] != 1 || cores[cores.len() - 1].shape()[2] != 1 {
            return Err(TtError::ShapeMismatch(
                "boundary ranks must both be 1".into(),
            ));
        }
        for k in 0..cores.len() - 1 {
            if cores[k].shape()[2] != cores[k + 1].shape()[0] {
                return Err(TtError::ShapeMismatch(format!(
                    "rank mismatch between cores {k} and {}: {} vs {}",
                    k + 1,
                    cores[k].shape()[2],
                    cores[k + 1].shape()[0]
                )));
            }
        }
        if cores.iter().any(|c| c.shape()[1] == 0) {
            return Err(TtError::InvalidArgument("zero-sized mode".into()));
        }
        Ok(Self { cores })
    }

    pub fn ndim(&self) -> usize {
        self.cores.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    /// Bond dimensions, `d + 1` entries including the two boundary ones.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = Vec::with_capacity(self.cores.len() + 1);
        r.push(1);
        for c in &self.cores {
            r.push(c.shape()[2]);
        }
        r
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    /// Mean of the full rank vector, boundary entries included.
    pub fn mean_rank(&self) -> f64 {
        let r = self.ranks();
        r.iter().sum::<usize>() as f64 / r.len() as f64
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cores(&self) -> &[Array3<f64>] {
        &self.cores
    }

    pub fn core(&self, k: usize) -> &Array3<f64> {
        &self.cores[k]
    }

    pub fn core_mut(&mut self, k: usize) -> &mut Array3<f64> {
        &mut self.cores[k]
    }

    pub fn into_cores(self) -> Vec<Array3<f64>> {
        self.cores
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let cores = shape.iter().map(|&n| Array3::zeros((1, n, 1))).collect();
        Self { cores }
    }

    pub fn ones(shape: &[usize]) -> Self {
        let cores = shape
            .iter()
            .map(|&n| Array3::from_elem((1, n, 1), 1.0))
            .collect();
        Self { cores }
    }

    /// Rank-1 tensor `f_1 ⊗ f_2 ⊗ ... ⊗ f_d`.
    pub fn rank_one(factors: &[&[f64]]) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|f| f.is_empty()) {
            return Err(TtError::InvalidArgument("empty factor".into()));
        }
        let cores = factors
            .iter()
            .map(|f| {
                Array3::from_shape_vec((1, f.len(), 1), f.to_vec())
                    .expect("factor buffer sized by construction")
            })
            .collect();
        Ok(Self { cores })
    }

    /// Random tensor with ranks clipped to `max_rank` and to what the mode
    /// sizes allow; entries come from the supplied generator.
    pub fn random_with(shape: &[usize], max_rank: usize, mut gen: impl FnMut() -> f64) -> Self {
        let ranks = feasible_ranks(shape, max_rank);
        let cores = shape
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                Array3::from_shape_simple_fn((ranks[k], n, ranks[k + 1]), &mut gen)
            })
            .collect();
        Self { cores }
    }

    /// TT-SVD compression of a dense tensor. The reconstruction satisfies
    /// `|full(t) - x|_F <= eps * |x|_F`; the tolerance is split evenly over
    /// the `d - 1` truncated unfoldings.
    pub fn from_dense(x: &DenseTensor, eps: f64) -> Result<Self> {
        if eps < 0.0 {
            return Err(TtError::InvalidArgument("eps must be >= 0".into()));
        }
        let shape = x.shape().to_vec();
        let d = shape.len();
        let norm = x.norm();
        if norm == 0.0 {
            return Ok(Self::zeros(&shape));
        }
        if d == 1 {
            let core = Array3::from_shape_vec((1, shape[0], 1), x.data().to_vec())
                .expect("sized by construction");
            return Ok(Self { cores: vec![core] });
        }
        let delta = eps * norm / ((d - 1) as f64).sqrt();
        let mut cores = Vec::with_capacity(d);
        let mut rest = Array2::from_shape_vec((1, x.len()), x.data().to_vec())
            .expect("sized by construction");
        let mut r = 1usize;
        for (k, &n) in shape.iter().enumerate().take(d - 1) {
            let cols = rest.len() / (r * n);
            let m = rest
                .into_shape_with_order((r * n, cols))
                .expect("contiguous");
            let (u, s, vt) = linalg::svd_trunc(m.view(), delta, None);
            let rk = s.len();
            cores.push(owned3(u, r, n, rk));
            let mut sv = vt;
            for (i, &si) in s.iter().enumerate() {
                sv.row_mut(i).mapv_inplace(|v| v * si);
            }
            rest = sv;
            r = rk;
            let _ = k;
        }
        cores.push(owned3(rest, r, shape[d - 1], 1));
        Ok(Self { cores })
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        self.to_dense_budget(DEFAULT_DENSE_BUDGET)
    }

    pub fn to_dense_budget(&self, budget: usize) -> Result<DenseTensor> {
        let shape = self.shape();
        let mut prod = 1usize;
        for (k, &n) in shape.iter().enumerate() {
            prod = prod.saturating_mul(n);
            let inter = prod.saturating_mul(self.cores[k].shape()[2]);
            if inter > budget {
                return Err(TtError::BudgetExceeded {
                    needed: inter,
                    budget,
                });
            }
        }
        let mut acc: Array2<f64> = Array2::ones((1, 1));
        for core in &self.cores {
            let (r, n, r2) = core3_dims(core);
            // (rows, r) x (r, n*r2) -> (rows*n, r2)
            let t = acc.dot(&mat2(core, r, n * r2));
            let rows = t.nrows() * n;
            acc = t.into_shape_with_order((rows, r2)).expect("contiguous");
        }
        DenseTensor::new(shape, acc.into_raw_vec_and_offset().0)
    }

    pub fn entry(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.ndim());
        let mut v = vec![1.0f64];
        for (k, core) in self.cores.iter().enumerate() {
            let (r, _, r2) = core3_dims(core);
            debug_assert_eq!(v.len(), r);
            let slice = core.index_axis(Axis(1), idx[k]);
            let mut out = vec![0.0f64; r2];
            for a in 0..r {
                let va = v[a];
                if va != 0.0 {
                    for b in 0..r2 {
                        out[b] += va * slice[(a, b)];
                    }
                }
            }
            v = out;
        }
        v[0]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut cores = self.cores.clone();
        cores[0].mapv_inplace(|v| v * s);
        Self { cores }
    }

    /// Elementwise sum. Ranks add exactly; round afterwards to compress.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(TtError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let d = self.ndim();
        if d == 1 {
            let core = &self.cores[0] + &other.cores[0];
            return Ok(Self { cores: vec![core] });
        }
        let mut cores = Vec::with_capacity(d);
        for k in 0..d {
            let a = &self.cores[k];
            let b = &other.cores[k];
            let (ra, n, ra2) = core3_dims(a);
            let (rb, _, rb2) = core3_dims(b);
            let core = if k == 0 {
                let mut c = Array3::zeros((1, n, ra2 + rb2));
                c.slice_mut(ndarray::s![.., .., ..ra2]).assign(a);
                c.slice_mut(ndarray::s![.., .., ra2..]).assign(b);
                c
            } else if k == d - 1 {
                let mut c = Array3::zeros((ra + rb, n, 1));
                c.slice_mut(ndarray::s![..ra, .., ..]).assign(a);
                c.slice_mut(ndarray::s![ra.., .., ..]).assign(b);
                c
            } else {
                let mut c = Array3::zeros((ra + rb, n, ra2 + rb2));
                c.slice_mut(ndarray::s![..ra, .., ..ra2]).assign(a);
                c.slice_mut(ndarray::s![ra.., .., ra2..]).assign(b);
                c
            };
            cores.push(core);
        }
        Ok(Self { cores })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Elementwise product. Ranks multiply exactly; round afterwards.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(TtError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut cores = Vec::with_capacity(self.ndim());
        for (a, b) in self.cores.iter().zip(&other.cores) {
            let (ra, n, ra2) = core3_dims(a);
            let (rb, _, rb2) = core3_dims(b);
            let mut c = Array3::zeros((ra * rb, n, ra2 * rb2));
            for i in 0..n {
                let sa = a.index_axis(Axis(1), i);
                let sb = b.index_axis(Axis(1), i);
                let mut sc = c.index_axis_mut(Axis(1), i);
                for p in 0..ra {
                    for q in 0..rb {
                        let row = p * rb + q;
                        for p2 in 0..ra2 {
                            let apq = sa[(p, p2)];
                            if apq == 0.0 {
                                continue;
                            }
                            for q2 in 0..rb2 {
                                sc[(row, p2 * rb2 + q2)] += apq * sb[(q, q2)];
                            }
                        }
                    }
                }
            }
            cores.push(c);
        }
        Ok(Self { cores })
    }

    /// Per-entry diagonal scaling along each mode: entry `(i_1, ..., i_d)` is
    /// multiplied by the product of `vecs[k][i_k]` over the modes where a
    /// vector is supplied. Ranks are unchanged.
    pub fn scale_modes(&self, vecs: &[Option<&[f64]>]) -> Result<Self> {
        if vecs.len() != self.ndim() {
            return Err(TtError::ShapeMismatch("one entry per mode".into()));
        }
        let mut cores = self.cores.clone();
        for (k, v) in vecs.iter().enumerate() {
            if let Some(v) = v {
                let n = cores[k].shape()[1];
                if v.len() != n {
                    return Err(TtError::ShapeMismatch(format!(
                        "mode {k}: vector length {} vs size {n}",
                        v.len()
                    )));
                }
                for (i, &vi) in v.iter().enumerate() {
                    cores[k]
                        .index_axis_mut(Axis(1), i)
                        .mapv_inplace(|x| x * vi);
                }
            }
        }
        Ok(Self { cores })
    }

    /// Applies one dense matrix per chosen mode: mode `k` of size `n_k` is
    /// mapped through `m_k` of shape `(out_k, n_k)`. Ranks are unchanged.
    pub fn mode_apply(&self, mats: &[Option<ArrayView2<'_, f64>>]) -> Result<Self> {
        if mats.len() != self.ndim() {
            return Err(TtError::ShapeMismatch("one entry per mode".into()));
        }
        let mut cores = Vec::with_capacity(self.ndim());
        for (k, core) in self.cores.iter().enumerate() {
            match &mats[k] {
                None => cores.push(core.clone()),
                Some(m) => {
                    let (r, n, r2) = core3_dims(core);
                    if m.ncols() != n {
                        return Err(TtError::ShapeMismatch(format!(
                            "mode {k}: matrix has {} columns, mode size is {n}",
                            m.ncols()
                        )));
                    }
                    let mut out = Array3::zeros((r, m.nrows(), r2));
                    for a in 0..r {
                        let slice = core.index_axis(Axis(0), a);
                        out.index_axis_mut(Axis(0), a).assign(&m.dot(&slice));
                    }
                    cores.push(out);
                }
            }
        }
        Ok(Self { cores })
    }

    /// Inner product `<self, other>` by sweeping a rank-by-rank Gram state.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(TtError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut phi: Array2<f64> = Array2::ones((1, 1));
        for (a, b) in self.cores.iter().zip(&other.cores) {
            let (ra, n, ra2) = core3_dims(a);
            let (rb, _, rb2) = core3_dims(b);
            // (ra, rb) x (rb, n*rb2) -> (ra, n*rb2) -> (ra*n, rb2)
            let t = phi.dot(&mat2(b, rb, n * rb2));
            let t = t.into_shape_with_order((ra * n, rb2)).expect("contiguous");
            phi = mat2(a, ra * n, ra2).t().dot(&t);
        }
        Ok(phi[(0, 0)])
    }

    /// Frobenius norm through orthogonalization. This is backward stable and
    /// does not square the conditioning the way `dot(self, self)` would, so
    /// it is safe for small residual tensors represented as differences of
    /// large terms.
    pub fn norm(&self) -> f64 {
        let mut carry: Array2<f64> = Array2::ones((1, 1));
        let d = self.ndim();
        for (k, core) in self.cores.iter().enumerate() {
            let (r, n, r2) = core3_dims(core);
            let t = carry.dot(&mat2(core, r, n * r2));
            let rows = t.nrows() * n;
            let t = t.into_shape_with_order((rows, r2)).expect("contiguous");
            if k + 1 == d {
                return t.iter().map(|x| x * x).sum::<f64>().sqrt();
            }
            let (_, r_fac) = linalg::qr_thin(t.view());
            carry = r_fac;
        }
        unreachable!("loop returns at the last core")
    }

    /// TT rounding: right-to-left orthogonalization followed by a
    /// left-to-right truncated-SVD pass. The result satisfies
    /// `|round(t) - t|_F <= eps * |t|_F` and never has larger ranks than the
    /// input. With `eps = 0` only exact zero singular values are dropped.
    pub fn round(&self, eps: f64) -> Self {
        self.round_with_max_rank(eps, None)
    }

    pub fn round_with_max_rank(&self, eps: f64, max_rank: Option<usize>) -> Self {
        let d = self.ndim();
        if d == 1 {
            return self.clone();
        }
        let mut cores = self.cores.clone();
        // Right-to-left: make cores 1..d right-orthonormal, pushing the
        // non-orthogonal factor into core 0.
        for k in (1..d).rev() {
            let (r, n, r2) = core3_dims(&cores[k]);
            let m = mat2(&cores[k], r, n * r2).to_owned();
            let (l, q) = linalg::lq_thin(m.view());
            let rk = q.nrows();
            cores[k] = owned3(q, rk, n, r2);
            let (rp, np, _) = core3_dims(&cores[k - 1]);
            let prev = mat2(&cores[k - 1], rp * np, r).dot(&l);
            cores[k - 1] = owned3(prev, rp, np, rk);
        }
        let norm: f64 = cores[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Self::zeros(&self.shape());
        }
        let delta = eps * norm / ((d - 1) as f64).sqrt();
        // Left-to-right truncation.
        for k in 0..d - 1 {
            let (r, n, r2) = core3_dims(&cores[k]);
            let m = mat2(&cores[k], r * n, r2).to_owned();
            let (u, s, vt) = linalg::svd_trunc(m.view(), delta, max_rank);
            let rk = s.len();
            cores[k] = owned3(u, r, n, rk);
            let mut sv = vt;
            for (i, &si) in s.iter().enumerate() {
                sv.row_mut(i).mapv_inplace(|v| v * si);
            }
            let (rn, nn, rn2) = core3_dims(&cores[k + 1]);
            let next = sv.dot(&mat2(&cores[k + 1], rn, nn * rn2));
            cores[k + 1] = owned3(next, rk, nn, rn2);
        }
        Self { cores }
    }
}

pub(crate) fn core3_dims(c: &Array3<f64>) -> (usize, usize, usize) {
    let s = c.shape();
    (s[0], s[1], s[2])
}

pub(crate) fn feasible_ranks(shape: &[usize], max_rank: usize) -> Vec<usize> {
    let d = shape.len();
    let mut left = vec![1usize; d + 1];
    for k in 0..d {
        left[k + 1] = left[k].saturating_mul(shape[k]).min(1 << 30);
    }
    let mut right = vec![1usize; d + 1];
    for k in (0..d).rev() {
        right[k] = right[k + 1].saturating_mul(shape[k]).min(1 << 30);
    }
    (0..=d)
        .map(|k| max_rank.max(1).min(left[k]).min(right[k]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_and_entry() {
        let t = TTTensor::ones(&[2, 3, 4]);
        assert_eq!(t.ranks(), vec![1, 1, 1, 1]);
        assert_eq!(t.entry(&[1, 2, 3]), 1.0);
        assert_eq!(t.len(), 24);
    }

    #[test]
    fn zero_dense_gives_rank_one_zero_cores() {
        let x = DenseTensor::zeros(vec![4, 5, 6]).unwrap();
        let t = TTTensor::from_dense(&x, 1e-10).unwrap();
        assert_eq!(t.ranks(), vec![1, 1, 1, 1]);
        assert!(t.cores().iter().all(|c| c.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn single_mode_round_trip_is_verbatim() {
        let x = DenseTensor::new(vec![5], vec![1.0, -2.0, 3.5, 0.0, 7.0]).unwrap();
        let t = TTTensor::from_dense(&x, 0.0).unwrap();
        assert_eq!(t.to_dense().unwrap().data(), x.data());
    }

    #[test]
    fn feasible_ranks_respect_mode_products() {
        assert_eq!(feasible_ranks(&[2, 3, 2], 100), vec![1, 2, 2, 1]);
        assert_eq!(feasible_ranks(&[4, 4, 4], 3), vec![1, 3, 3, 1]);
    }
}
