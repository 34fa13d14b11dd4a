use std::collections::HashSet;

use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use tt_core::{linalg, TTTensor};

use crate::maxvol::maxvol;

/// Black-box tensor: a shape plus a batched entry oracle. `indices` is a
/// flat buffer of multi-indices, `d` entries each; one value per index is
/// returned in order. The oracle must be deterministic.
pub trait BlackBox {
    fn shape(&self) -> &[usize];
    fn eval_batch(&self, indices: &[usize]) -> Vec<f64>;
}

/// Adapter turning a per-entry closure into a [`BlackBox`].
pub struct FnOracle<F: Fn(&[usize]) -> f64> {
    shape: Vec<usize>,
    f: F,
}

impl<F: Fn(&[usize]) -> f64> FnOracle<F> {
    pub fn new(shape: Vec<usize>, f: F) -> Self {
        Self { shape, f }
    }
}

impl<F: Fn(&[usize]) -> f64> BlackBox for FnOracle<F> {
    fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn eval_batch(&self, indices: &[usize]) -> Vec<f64> {
        let d = self.shape.len();
        indices.chunks_exact(d).map(|idx| (self.f)(idx)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct CrossOptions {
    /// Target maximum error on the validation set, relative to the largest
    /// validation magnitude.
    pub tol: f64,
    /// Bond rank cap.
    pub max_rank: usize,
    /// Full left-right/right-left sweep pairs before giving up.
    pub max_sweeps: usize,
    /// Random validation indices resampled after every sweep.
    pub validation_size: usize,
    /// Starting bond rank.
    pub initial_rank: usize,
    pub seed: u64,
}

impl Default for CrossOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_rank: 64,
            max_sweeps: 40,
            validation_size: 1000,
            initial_rank: 1,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Error)]
pub enum CrossError {
    #[error("matrix unusable for maxvol: {0}")]
    BadMatrix(String),
    #[error("rank-deficient matrix in row selection")]
    RankDeficient,
    #[error("invalid options: {0}")]
    BadOptions(String),
    #[error(
        "cross interpolation stalled at error {achieved:.3e} (target {target:.3e}, max rank {max_rank})"
    )]
    NotConverged {
        achieved: f64,
        target: f64,
        max_rank: usize,
    },
    #[error(transparent)]
    Core(#[from] tt_core::TtError),
}

/// Outcome of [`cross_interpolate`]. `converged` tells whether the
/// validation error reached the target before the rank cap or sweep limit.
#[derive(Debug, Clone)]
pub struct CrossResult {
    pub tensor: TTTensor,
    /// Exact number of oracle evaluations issued.
    pub oracle_calls: usize,
    /// Completed sweep pairs.
    pub sweeps: usize,
    pub converged: bool,
    /// Last validation error (max abs deviation over max abs value).
    pub achieved_error: f64,
    /// Validation tolerance the run aimed for.
    pub target: f64,
    /// Whether the final validation set was fully disjoint from the
    /// interpolation crosses (it may overlap on tiny tensors).
    pub validation_disjoint: bool,
    /// `left_sets[k]` holds the final prefixes of length `k`, one per row
    /// of the mode-`k` unfolding. Together with `right_sets[k]` (suffixes
    /// starting at mode `k + 1`), the result interpolates the oracle
    /// exactly on `left_sets[k] x {0..n_k} x right_sets[k]` for every mode.
    pub left_sets: Vec<Vec<Vec<usize>>>,
    pub right_sets: Vec<Vec<Vec<usize>>>,
}

impl CrossResult {
    pub fn require_converged(self) -> Result<CrossResult, CrossError> {
        if self.converged {
            Ok(self)
        } else {
            Err(CrossError::NotConverged {
                achieved: self.achieved_error,
                target: self.target,
                max_rank: self.tensor.max_rank(),
            })
        }
    }
}

struct Driver<'a> {
    oracle: &'a dyn BlackBox,
    shape: Vec<usize>,
    d: usize,
    calls: usize,
}

impl<'a> Driver<'a> {
    fn eval(&mut self, flat: &[usize]) -> Vec<f64> {
        debug_assert_eq!(flat.len() % self.d, 0);
        self.calls += flat.len() / self.d;
        self.oracle.eval_batch(flat)
    }

    /// Unfolding A[(a, i), b] = f(left[a] ++ i ++ right[b]) as a
    /// (|left| * n_k) x |right| matrix.
    fn unfolding(
        &mut self,
        k: usize,
        left: &[Vec<usize>],
        right: &[Vec<usize>],
    ) -> Array2<f64> {
        let n = self.shape[k];
        let (rl, rr) = (left.len(), right.len());
        let mut flat = Vec::with_capacity(rl * n * rr * self.d);
        for pre in left {
            for i in 0..n {
                for suf in right {
                    flat.extend_from_slice(pre);
                    flat.push(i);
                    flat.extend_from_slice(suf);
                }
            }
        }
        let vals = self.eval(&flat);
        Array2::from_shape_vec((rl * n, rr), vals).expect("sized by construction")
    }
}

/// Interpolates a black-box tensor in TT format.
pub fn cross_interpolate(
    oracle: &dyn BlackBox,
    opts: &CrossOptions,
) -> Result<CrossResult, CrossError> {
    if opts.tol <= 0.0 {
        return Err(CrossError::BadOptions("tol must be positive".into()));
    }
    if opts.max_rank == 0 || opts.initial_rank == 0 {
        return Err(CrossError::BadOptions("ranks must be >= 1".into()));
    }
    let shape = oracle.shape().to_vec();
    if shape.is_empty() || shape.contains(&0) {
        return Err(CrossError::BadOptions("shape must be positive".into()));
    }
    let d = shape.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut driver = Driver {
        oracle,
        shape: shape.clone(),
        d,
        calls: 0,
    };

    // Feasible rank bound per bond.
    let cap = |k: usize| -> usize {
        let left: usize = shape[..k].iter().product::<usize>().min(1 << 20);
        let right: usize = shape[k..].iter().product::<usize>().min(1 << 20);
        opts.max_rank.min(left).min(right)
    };

    // Right index sets J_k (suffixes starting at mode k); J_d = [()].
    let mut right_sets: Vec<Vec<Vec<usize>>> = (0..=d)
        .map(|k| {
            if k == 0 || k == d {
                vec![Vec::new()]
            } else {
                let mut set = Vec::new();
                let want = opts.initial_rank.min(cap(k));
                let mut guard = 0;
                while set.len() < want && guard < 100 * want {
                    let suf: Vec<usize> =
                        (k..d).map(|m| rng.gen_range(0..shape[m])).collect();
                    if !set.contains(&suf) {
                        set.push(suf);
                    }
                    guard += 1;
                }
                set
            }
        })
        .collect();
    right_sets[0] = vec![Vec::new()]; // placeholder, unused

    let mut left_sets: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new()]; d + 1];
    let mut cores: Vec<Array3<f64>> = Vec::new();
    let mut last_err = f64::INFINITY;
    let mut sweeps_done = 0usize;
    let mut validation_disjoint = true;
    let mut converged = false;

    for sweep in 0..opts.max_sweeps {
        // Left-to-right: rebuild prefix sets (the last mode has no bond to
        // its right, so it is skipped).
        left_sets[0] = vec![Vec::new()];
        for k in 0..d.saturating_sub(1) {
            let a = driver.unfolding(k, &left_sets[k], &right_sets[k + 1]);
            let (q, _) = linalg::qr_thin(a.view());
            let rows = maxvol(q.view(), 0.01)?;
            let n = shape[k];
            left_sets[k + 1] = rows
                .iter()
                .map(|&row| {
                    let (ai, i) = (row / n, row % n);
                    let mut pre = left_sets[k][ai].clone();
                    pre.push(i);
                    pre
                })
                .collect();
        }

        // Right-to-left: rebuild suffix sets and the interpolation cores.
        cores = vec![Array3::zeros((0, 0, 0)); d];
        for k in (0..d).rev() {
            let n = shape[k];
            let rl = left_sets[k].len();
            let rr = right_sets[k + 1].len();
            let a = driver.unfolding(k, &left_sets[k], &right_sets[k + 1]);
            if k == 0 {
                // Oracle values verbatim; the chain interpolates exactly at
                // the right crosses.
                cores[0] = a
                    .into_shape_with_order((1, n, rr))
                    .expect("contiguous");
                break;
            }
            // Arrange as ((i, b), a) and select rows (i, b) for J_k.
            let at = a
                .into_shape_with_order((rl, n * rr))
                .expect("contiguous")
                .t()
                .to_owned();
            let (q, _) = linalg::qr_thin(at.view());
            let rows = maxvol(q.view(), 0.01)?;
            let rk = rows.len();
            // Interpolation coefficients C = Q * inv(Q[rows]).
            let mut sub = Array2::zeros((rk, rk));
            for (s, &row) in rows.iter().enumerate() {
                sub.row_mut(s).assign(&q.row(row));
            }
            let lu = linalg::LuFactor::new(sub.t().to_owned().view())?;
            let coeff = lu
                .solve_mat(q.t().to_owned().view())
                .ok_or(CrossError::RankDeficient)?; // (rk, n*rr)
            // core[a, i, b] = coeff^T[(i, b), a] transposed into (rk, n, rr)
            // -> here coeff rows are the new rank axis.
            let core = coeff
                .into_shape_with_order((rk, n, rr))
                .expect("contiguous");
            cores[k] = core;
            right_sets[k] = rows
                .iter()
                .map(|&row| {
                    let (i, b) = (row / rr, row % rr);
                    let mut suf = vec![i];
                    suf.extend_from_slice(&right_sets[k + 1][b]);
                    suf
                })
                .collect();
        }
        sweeps_done = sweep + 1;
        let tensor = TTTensor::new(cores.clone())?;

        // Validation on indices outside the interpolation crosses.
        let (err, disjoint) = validation_error(
            &mut driver,
            &tensor,
            &left_sets,
            &right_sets,
            opts.validation_size,
            &mut rng,
        );
        validation_disjoint = disjoint;
        last_err = err;
        if err <= opts.tol {
            converged = true;
            break;
        }

        // Grow every interior bond below its cap by one random suffix.
        let mut grew = false;
        for k in 1..d {
            if right_sets[k].len() < cap(k) {
                let mut guard = 0;
                loop {
                    let suf: Vec<usize> =
                        (k..d).map(|m| rng.gen_range(0..shape[m])).collect();
                    if !right_sets[k].contains(&suf) {
                        right_sets[k].push(suf);
                        grew = true;
                        break;
                    }
                    guard += 1;
                    if guard > 200 {
                        break;
                    }
                }
            }
        }
        if !grew && sweep + 1 < opts.max_sweeps {
            // All bonds capped; one more sweep cannot improve the sets.
            break;
        }
    }

    let tensor = TTTensor::new(cores)?;
    Ok(CrossResult {
        tensor,
        oracle_calls: driver.calls,
        sweeps: sweeps_done,
        converged,
        achieved_error: last_err,
        target: opts.tol,
        validation_disjoint,
        left_sets: left_sets[..d].to_vec(),
        right_sets: right_sets[1..=d].to_vec(),
    })
}

/// Max abs deviation over max abs value on a random set of indices that
/// avoid the interpolation crosses when possible.
fn validation_error(
    driver: &mut Driver<'_>,
    tensor: &TTTensor,
    left_sets: &[Vec<Vec<usize>>],
    right_sets: &[Vec<Vec<usize>>],
    size: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, bool) {
    let shape = driver.shape.clone();
    let d = driver.d;
    let numel: usize = shape.iter().product::<usize>().min(1 << 20);
    let size = size.min(numel);

    let left_hash: Vec<HashSet<&[usize]>> = left_sets
        .iter()
        .map(|s| s.iter().map(|v| v.as_slice()).collect())
        .collect();
    let right_hash: Vec<HashSet<&[usize]>> = right_sets
        .iter()
        .map(|s| s.iter().map(|v| v.as_slice()).collect())
        .collect();
    let in_cross = |idx: &[usize]| -> bool {
        for k in 0..d {
            if left_hash[k].contains(&idx[..k]) && right_hash[k + 1].contains(&idx[k + 1..]) {
                return true;
            }
        }
        false
    };

    let mut picked: Vec<usize> = Vec::with_capacity(size * d);
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(size);
    let mut disjoint = true;
    let mut attempts = 0usize;
    while seen.len() < size {
        let idx: Vec<usize> = shape.iter().map(|&n| rng.gen_range(0..n)).collect();
        attempts += 1;
        let overlaps = in_cross(&idx);
        if (!overlaps || attempts > 100 * size) && !seen.contains(&idx) {
            if overlaps {
                disjoint = false;
            }
            picked.extend_from_slice(&idx);
            seen.insert(idx);
        }
        if attempts > 1000 * size {
            break;
        }
    }
    if seen.is_empty() {
        return (0.0, disjoint);
    }
    let vals = driver.eval(&picked);
    let mut max_abs = 0.0f64;
    let mut max_dev = 0.0f64;
    for (chunk, &want) in picked.chunks_exact(d).zip(&vals) {
        let got = tensor.entry(chunk);
        max_abs = max_abs.max(want.abs());
        max_dev = max_dev.max((got - want).abs());
    }
    (max_dev / max_abs.max(f64::MIN_POSITIVE), disjoint)
}
