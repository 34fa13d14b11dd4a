use crate::error::{Result, SplineError};
use crate::knots::KnotVector;

/// Degree-`p` B-spline basis over an open knot vector, evaluated by the
/// Cox-de Boor triangle. At any point at most `p + 1` functions are nonzero.
#[derive(Debug, Clone)]
pub struct BSplineBasis {
    kv: KnotVector,
}

impl BSplineBasis {
    pub fn new(kv: KnotVector) -> Self {
        Self { kv }
    }

    pub fn open_uniform(n: usize, p: usize) -> Result<Self> {
        Ok(Self::new(KnotVector::open_uniform(n, p)?))
    }

    pub fn open_with_multiplicities(n: usize, p: usize, raised: &[(f64, usize)]) -> Result<Self> {
        Ok(Self::new(KnotVector::open_with_multiplicities(n, p, raised)?))
    }

    pub fn degree(&self) -> usize {
        self.kv.degree()
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.kv.basis_len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.kv
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.kv.breakpoints()
    }

    pub fn num_spans(&self) -> usize {
        self.kv.breakpoints().len() - 1
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&x) {
            return Err(SplineError::OutOfDomain(x));
        }
        Ok(())
    }

    /// Knot span index `i` with `z_i <= x < z_{i+1}` (and `x = 1` mapping to
    /// the last nonempty span), always in `p..n-1`.
    pub fn find_span(&self, x: f64) -> usize {
        let z = self.kv.knots();
        let p = self.degree();
        let n = self.len();
        if x >= z[n] {
            return n - 1;
        }
        let (mut lo, mut hi) = (p, n - 1);
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if z[mid] <= x {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// The `p + 1` possibly-nonzero basis values at `x`, returned with the
    /// index of the first one.
    pub fn eval_nonzero(&self, x: f64) -> Result<(usize, Vec<f64>)> {
        self.check_domain(x)?;
        let i = self.find_span(x);
        Ok((i - self.degree(), self.triangle(i, x)))
    }

    /// Cox-de Boor triangle at span `i`: values of functions
    /// `i-p ..= i` at `x`.
    fn triangle(&self, i: usize, x: f64) -> Vec<f64> {
        let z = self.kv.knots();
        let p = self.degree();
        let mut vals = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        vals[0] = 1.0;
        for j in 1..=p {
            left[j] = x - z[i + 1 - j];
            right[j] = z[i + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = vals[r] / (right[r + 1] + left[j - r]);
                vals[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            vals[j] = saved;
        }
        vals
    }

    /// First derivatives of the `p + 1` possibly-nonzero functions at `x`,
    /// by the knot-difference recurrence on the degree-(p-1) values.
    pub fn eval_nonzero_deriv(&self, x: f64) -> Result<(usize, Vec<f64>)> {
        self.check_domain(x)?;
        let i = self.find_span(x);
        let p = self.degree();
        let z = self.kv.knots();
        // Degree p-1 values on the same span: functions i-p+1 ..= i.
        let lower = self.triangle_degree(i, x, p - 1);
        let pf = p as f64;
        let mut ders = vec![0.0; p + 1];
        for (j, der) in ders.iter_mut().enumerate() {
            let k = i - p + j;
            // b'_k = p * ( N_{k}^{p-1} / (z_{k+p} - z_k)
            //           - N_{k+1}^{p-1} / (z_{k+p+1} - z_{k+1}) )
            let mut v = 0.0;
            if k >= i - p + 1 {
                let denom = z[k + p] - z[k];
                if denom > 0.0 {
                    v += lower[k - (i - p + 1)] / denom;
                }
            }
            if k + 1 <= i {
                let denom = z[k + p + 1] - z[k + 1];
                if denom > 0.0 {
                    v -= lower[k + 1 - (i - p + 1)] / denom;
                }
            }
            *der = pf * v;
        }
        Ok((i - p, ders))
    }

    /// Triangle for an arbitrary degree `q <= p` on span `i`: values of the
    /// degree-`q` functions `i-q ..= i`.
    fn triangle_degree(&self, i: usize, x: f64, q: usize) -> Vec<f64> {
        let z = self.kv.knots();
        let mut vals = vec![0.0; q + 1];
        let mut left = vec![0.0; q + 1];
        let mut right = vec![0.0; q + 1];
        vals[0] = 1.0;
        for j in 1..=q {
            left[j] = x - z[i + 1 - j];
            right[j] = z[i + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = vals[r] / (right[r + 1] + left[j - r]);
                vals[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            vals[j] = saved;
        }
        vals
    }

    /// All `n` basis values at `x` (zero outside the active span).
    pub fn eval_all(&self, x: f64) -> Result<Vec<f64>> {
        let (first, vals) = self.eval_nonzero(x)?;
        let mut out = vec![0.0; self.len()];
        out[first..first + vals.len()].copy_from_slice(&vals);
        Ok(out)
    }

    /// All `n` first derivatives at `x`.
    pub fn eval_all_deriv(&self, x: f64) -> Result<Vec<f64>> {
        let (first, ders) = self.eval_nonzero_deriv(x)?;
        let mut out = vec![0.0; self.len()];
        out[first..first + ders.len()].copy_from_slice(&ders);
        Ok(out)
    }

    /// Greville abscissae: point `m` is the mean of the `p` knots
    /// `z_{m+1} ..= z_{m+p}`. Collocation at these points is nonsingular.
    pub fn greville(&self) -> Vec<f64> {
        let z = self.kv.knots();
        let p = self.degree();
        (0..self.len())
            .map(|m| z[m + 1..=m + p].iter().sum::<f64>() / p as f64)
            .collect()
    }
}
