use ndarray::{Array2, Array3, Array4, ArrayView2, Axis};

use crate::error::{Result, TtError};
use crate::tensor::{core3_dims, feasible_ranks, TTTensor};
use crate::DEFAULT_DENSE_BUDGET;

/// Linear operator in tensor-train format.
///
/// Core `k` has shape `(R_{k-1}, m_k, n_k, R_k)` where `m_k` and `n_k` are
/// the row and column sizes of mode `k`. The operator maps tensors of shape
/// `(n_1, ..., n_d)` to tensors of shape `(m_1, ..., m_d)`; its entry at a
/// (row, column) multi-index pair is the chain product of the per-mode
/// slices, exactly as for [`TTTensor`].
#[derive(Debug, Clone)]
pub struct TTMatrix {
    cores: Vec<Array4<f64>>,
}

fn core4_dims(c: &Array4<f64>) -> (usize, usize, usize, usize) {
    let s = c.shape();
    (s[0], s[1], s[2], s[3])
}

impl TTMatrix {
    pub fn new(cores: Vec<Array4<f64>>) -> Result<Self> {
        if cores.is_empty() {
            return Err(TtError::InvalidArgument("empty core list".into()));
        }
        if cores[0].shape()[0] != 1 || cores[cores.len() - 1].shape()[3] != 1 {
            return Err(TtError::ShapeMismatch(
                "boundary ranks must both be 1".into(),
            ));
        }
        for k in 0..cores.len() - 1 {
            if cores[k].shape()[3] != cores[k + 1].shape()[0] {
                return Err(TtError::ShapeMismatch(format!(
                    "rank mismatch between cores {k} and {}",
                    k + 1
                )));
            }
        }
        if cores.iter().any(|c| c.shape()[1] == 0 || c.shape()[2] == 0) {
            return Err(TtError::InvalidArgument("zero-sized mode".into()));
        }
        Ok(Self { cores })
    }

    pub fn ndim(&self) -> usize {
        self.cores.len()
    }

    pub fn row_shape(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    pub fn col_shape(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[2]).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        let mut r = Vec::with_capacity(self.cores.len() + 1);
        r.push(1);
        for c in &self.cores {
            r.push(c.shape()[3]);
        }
        r
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    pub fn cores(&self) -> &[Array4<f64>] {
        &self.cores
    }

    pub fn core(&self, k: usize) -> &Array4<f64> {
        &self.cores[k]
    }

    pub fn core_mut(&mut self, k: usize) -> &mut Array4<f64> {
        &mut self.cores[k]
    }

    pub fn into_cores(self) -> Vec<Array4<f64>> {
        self.cores
    }

    pub fn identity(shape: &[usize]) -> Self {
        let cores = shape
            .iter()
            .map(|&n| {
                let mut c = Array4::zeros((1, n, n, 1));
                for i in 0..n {
                    c[(0, i, i, 0)] = 1.0;
                }
                c
            })
            .collect();
        Self { cores }
    }

    /// Diagonal operator whose diagonal is the given tensor. Ranks carry
    /// over unchanged.
    pub fn diag(t: &TTTensor) -> Self {
        let cores = t
            .cores()
            .iter()
            .map(|c| {
                let (r, n, r2) = core3_dims(c);
                let mut out = Array4::zeros((r, n, n, r2));
                for i in 0..n {
                    out.slice_mut(ndarray::s![.., i, i, ..])
                        .assign(&c.index_axis(Axis(1), i));
                }
                out
            })
            .collect();
        Self { cores }
    }

    /// Rank-1 operator `M_1 ⊗ M_2 ⊗ ... ⊗ M_d` from one dense matrix per
    /// mode.
    pub fn from_mode_matrices(mats: &[ArrayView2<'_, f64>]) -> Result<Self> {
        if mats.is_empty() {
            return Err(TtError::InvalidArgument("empty matrix list".into()));
        }
        let cores = mats
            .iter()
            .map(|m| {
                let (rows, cols) = (m.nrows(), m.ncols());
                let mut c = Array4::zeros((1, rows, cols, 1));
                c.slice_mut(ndarray::s![0, .., .., 0]).assign(m);
                c
            })
            .collect();
        Ok(Self { cores })
    }

    pub fn random_with(
        row_shape: &[usize],
        col_shape: &[usize],
        max_rank: usize,
        mut gen: impl FnMut() -> f64,
    ) -> Result<Self> {
        if row_shape.len() != col_shape.len() || row_shape.is_empty() {
            return Err(TtError::ShapeMismatch(
                "row and column shapes must have equal positive length".into(),
            ));
        }
        let fused: Vec<usize> = row_shape
            .iter()
            .zip(col_shape)
            .map(|(&m, &n)| m * n)
            .collect();
        let ranks = feasible_ranks(&fused, max_rank);
        let cores = (0..row_shape.len())
            .map(|k| {
                Array4::from_shape_simple_fn(
                    (ranks[k], row_shape[k], col_shape[k], ranks[k + 1]),
                    &mut gen,
                )
            })
            .collect();
        Ok(Self { cores })
    }

    /// Reinterprets each core `(R, m, n, R')` as `(R, m*n, R')`, giving the
    /// TT tensor over the fused row-column modes. Shares no storage tricks:
    /// the reshape is exact because `m` is the slower of the fused pair.
    pub fn to_fused_tensor(&self) -> TTTensor {
        let cores = self
            .cores
            .iter()
            .map(|c| {
                let (r, m, n, r2) = core4_dims(c);
                c.clone()
                    .into_shape_with_order((r, m * n, r2))
                    .expect("contiguous")
            })
            .collect();
        TTTensor::new(cores).expect("fused cores stay chain-consistent")
    }

    pub fn from_fused_tensor(
        t: &TTTensor,
        row_shape: &[usize],
        col_shape: &[usize],
    ) -> Result<Self> {
        if row_shape.len() != t.ndim() || col_shape.len() != t.ndim() {
            return Err(TtError::ShapeMismatch("mode count mismatch".into()));
        }
        let mut cores = Vec::with_capacity(t.ndim());
        for (k, c) in t.cores().iter().enumerate() {
            let (r, fused, r2) = core3_dims(c);
            if fused != row_shape[k] * col_shape[k] {
                return Err(TtError::ShapeMismatch(format!(
                    "mode {k}: fused size {fused} vs {} x {}",
                    row_shape[k], col_shape[k]
                )));
            }
            cores.push(
                c.clone()
                    .into_shape_with_order((r, row_shape[k], col_shape[k], r2))
                    .expect("contiguous"),
            );
        }
        Self::new(cores)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut cores = self.cores.clone();
        cores[0].mapv_inplace(|v| v * s);
        Self { cores }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.row_shape() != other.row_shape() || self.col_shape() != other.col_shape() {
            return Err(TtError::ShapeMismatch("operator shapes differ".into()));
        }
        let sum = self.to_fused_tensor().add(&other.to_fused_tensor())?;
        Self::from_fused_tensor(&sum, &self.row_shape(), &self.col_shape())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn transpose(&self) -> Self {
        let cores = self
            .cores
            .iter()
            .map(|c| {
                let mut v = c.view();
                v.swap_axes(1, 2);
                v.as_standard_layout().into_owned()
            })
            .collect();
        Self { cores }
    }

    /// Diagonal congruence scaling: row index `m` of mode `k` is scaled by
    /// `row_vecs[k][m]` and column index `n` by `col_vecs[k][n]`. Ranks are
    /// unchanged; this is how boundary projectors are applied cheaply.
    pub fn scale_modes(
        &self,
        row_vecs: &[Option<&[f64]>],
        col_vecs: &[Option<&[f64]>],
    ) -> Result<Self> {
        if row_vecs.len() != self.ndim() || col_vecs.len() != self.ndim() {
            return Err(TtError::ShapeMismatch("one entry per mode".into()));
        }
        let mut cores = self.cores.clone();
        for k in 0..cores.len() {
            if let Some(v) = row_vecs[k] {
                if v.len() != cores[k].shape()[1] {
                    return Err(TtError::ShapeMismatch(format!("row vector, mode {k}")));
                }
                for (i, &vi) in v.iter().enumerate() {
                    cores[k]
                        .index_axis_mut(Axis(1), i)
                        .mapv_inplace(|x| x * vi);
                }
            }
            if let Some(v) = col_vecs[k] {
                if v.len() != cores[k].shape()[2] {
                    return Err(TtError::ShapeMismatch(format!("column vector, mode {k}")));
                }
                for (j, &vj) in v.iter().enumerate() {
                    cores[k]
                        .index_axis_mut(Axis(2), j)
                        .mapv_inplace(|x| x * vj);
                }
            }
        }
        Ok(Self { cores })
    }

    /// Matrix-vector product in TT format. The result has ranks
    /// `R_k * r_k`; round afterwards to compress.
    pub fn apply(&self, x: &TTTensor) -> Result<TTTensor> {
        if self.col_shape() != x.shape() {
            return Err(TtError::ShapeMismatch(format!(
                "operator columns {:?} vs tensor shape {:?}",
                self.col_shape(),
                x.shape()
            )));
        }
        let mut cores = Vec::with_capacity(self.ndim());
        for (a, b) in self.cores.iter().zip(x.cores()) {
            let (ra, m, n, ra2) = core4_dims(a);
            let (rb, _, rb2) = core3_dims(b);
            // A -> (ra, m, ra2, n), flattened to (ra*m*ra2, n).
            let mut av = a.view();
            av.swap_axes(2, 3);
            let ap = av.as_standard_layout().into_owned();
            let ap = ap
                .into_shape_with_order((ra * m * ra2, n))
                .expect("contiguous");
            // X -> (n, rb*rb2).
            let mut bv = b.view();
            bv.swap_axes(0, 1);
            let bp = bv.as_standard_layout().into_owned();
            let bp = bp
                .into_shape_with_order((n, rb * rb2))
                .expect("contiguous");
            let t = ap.dot(&bp);
            let t = t
                .into_shape_with_order((ra, m, ra2, rb, rb2))
                .expect("contiguous");
            // -> (ra, rb, m, ra2, rb2)
            let t = t.permuted_axes([0, 3, 1, 2, 4]);
            let t = t.as_standard_layout().into_owned();
            cores.push(
                t.into_shape_with_order((ra * rb, m, ra2 * rb2))
                    .expect("contiguous"),
            );
        }
        Ok(TTTensor::new(cores).expect("chain-consistent by construction"))
    }

    pub fn apply_rounded(&self, x: &TTTensor, eps: f64) -> Result<TTTensor> {
        Ok(self.apply(x)?.round(eps))
    }

    /// Operator product `self * other` in TT format; ranks multiply.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.col_shape() != other.row_shape() {
            return Err(TtError::ShapeMismatch(format!(
                "inner shapes differ: {:?} vs {:?}",
                self.col_shape(),
                other.row_shape()
            )));
        }
        let mut cores = Vec::with_capacity(self.ndim());
        for (a, b) in self.cores.iter().zip(&other.cores) {
            let (ra, m, k, ra2) = core4_dims(a);
            let (rb, _, n, rb2) = core4_dims(b);
            let mut av = a.view();
            av.swap_axes(2, 3); // (ra, m, ra2, k)
            let ap = av.as_standard_layout().into_owned();
            let ap = ap
                .into_shape_with_order((ra * m * ra2, k))
                .expect("contiguous");
            let mut bv = b.view();
            bv.swap_axes(0, 1); // (k, rb, n, rb2)
            let bp = bv.as_standard_layout().into_owned();
            let bp = bp
                .into_shape_with_order((k, rb * n * rb2))
                .expect("contiguous");
            let t = ap.dot(&bp);
            let t = t
                .into_shape_with_order((ra, m, ra2, rb, n, rb2))
                .expect("contiguous");
            // -> (ra, rb, m, n, ra2, rb2)
            let t = t.permuted_axes([0, 3, 1, 4, 2, 5]);
            let t = t.as_standard_layout().into_owned();
            cores.push(
                t.into_shape_with_order((ra * rb, m, n, ra2 * rb2))
                    .expect("contiguous"),
            );
        }
        Ok(Self { cores })
    }

    /// Rounds through the fused-mode tensor; the tolerance has the same
    /// relative Frobenius meaning as [`TTTensor::round`].
    pub fn round(&self, eps: f64) -> Self {
        self.round_with_max_rank(eps, None)
    }

    pub fn round_with_max_rank(&self, eps: f64, max_rank: Option<usize>) -> Self {
        let fused = self.to_fused_tensor().round_with_max_rank(eps, max_rank);
        Self::from_fused_tensor(&fused, &self.row_shape(), &self.col_shape())
            .expect("rounding preserves mode sizes")
    }

    /// Entry at a (row, column) multi-index pair.
    pub fn entry(&self, row: &[usize], col: &[usize]) -> f64 {
        debug_assert_eq!(row.len(), self.ndim());
        debug_assert_eq!(col.len(), self.ndim());
        let mut v = vec![1.0f64];
        for (k, core) in self.cores.iter().enumerate() {
            let (r, _, _, r2) = core4_dims(core);
            let slice = core
                .index_axis(Axis(1), row[k])
                .index_axis(Axis(1), col[k])
                .to_owned();
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

    /// Materializes the full operator as a `(prod(row_shape),
    /// prod(col_shape))` matrix. Row and column multi-indices are linearized
    /// last-index-fastest, matching [`crate::DenseTensor`].
    pub fn full_matrix(&self) -> Result<Array2<f64>> {
        self.full_matrix_budget(DEFAULT_DENSE_BUDGET)
    }

    pub fn full_matrix_budget(&self, budget: usize) -> Result<Array2<f64>> {
        let rows: usize = self.row_shape().iter().product();
        let cols: usize = self.col_shape().iter().product();
        let fused = self.to_fused_tensor().to_dense_budget(budget)?;
        let row_shape = self.row_shape();
        let col_shape = self.col_shape();
        let d = self.ndim();
        let mut out = Array2::zeros((rows, cols));
        let mut ridx = vec![0usize; d];
        for i in 0..rows {
            let mut cidx = vec![0usize; d];
            for j in 0..cols {
                let mut fused_idx = Vec::with_capacity(d);
                for k in 0..d {
                    fused_idx.push(ridx[k] * col_shape[k] + cidx[k]);
                }
                out[(i, j)] = fused.get(&fused_idx);
                advance(&mut cidx, &col_shape);
            }
            advance(&mut ridx, &row_shape);
        }
        Ok(out)
    }

    /// Diagonal of the operator as a TT tensor (requires square modes).
    pub fn diagonal(&self) -> Result<TTTensor> {
        if self.row_shape() != self.col_shape() {
            return Err(TtError::ShapeMismatch(
                "diagonal needs square modes".into(),
            ));
        }
        let cores = self
            .cores
            .iter()
            .map(|c| {
                let (r, n, _, r2) = core4_dims(c);
                let mut out = Array3::zeros((r, n, r2));
                for i in 0..n {
                    out.index_axis_mut(Axis(1), i)
                        .assign(&c.slice(ndarray::s![.., i, i, ..]));
                }
                out
            })
            .collect();
        Ok(TTTensor::new(cores).expect("chain-consistent by construction"))
    }
}

fn advance(idx: &mut [usize], shape: &[usize]) {
    for k in (0..shape.len()).rev() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return;
        }
        idx[k] = 0;
    }
}
