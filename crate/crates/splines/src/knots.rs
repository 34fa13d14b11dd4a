use crate::error::{Result, SplineError};

/// Open (clamped) knot vector on [0, 1] for a degree-`p` basis of size `n`:
/// `n + p + 1` nondecreasing knots with the first and last `p + 1` pinned to
/// 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

/// Tolerance for matching requested knot values against the uniform grid.
const GRID_TOL: f64 = 1e-12;

impl KnotVector {
    /// Uniform open knot vector: interior knots at `i / (n - p)` for
    /// `i = 1..n-p-1`, all simple.
    pub fn open_uniform(n: usize, p: usize) -> Result<Self> {
        Self::open_with_multiplicities(n, p, &[])
    }

    /// Open knot vector whose interior knots form a uniform grid except that
    /// the listed values carry a higher total multiplicity. `raised` maps a
    /// knot value to its total multiplicity (so `(0.5, 2)` means the knot
    /// 0.5 appears twice). Each raised value must lie on the uniform grid
    /// implied by the remaining knot budget.
    pub fn open_with_multiplicities(n: usize, p: usize, raised: &[(f64, usize)]) -> Result<Self> {
        if p == 0 {
            return Err(SplineError::InvalidBasis("degree must be >= 1".into()));
        }
        if n < p + 1 {
            return Err(SplineError::InvalidBasis(format!(
                "basis size {n} below degree + 1 = {}",
                p + 1
            )));
        }
        let interior_total = n - p - 1;
        let mut extra = 0usize;
        for &(v, m) in raised {
            if !(0.0 < v && v < 1.0) {
                return Err(SplineError::InvalidKnots(format!(
                    "raised knot {v} not strictly inside (0, 1)"
                )));
            }
            if m < 1 || m > p {
                return Err(SplineError::InvalidKnots(format!(
                    "multiplicity {m} of knot {v} outside 1..=p"
                )));
            }
            extra += m - 1;
        }
        if extra > interior_total {
            return Err(SplineError::InvalidKnots(format!(
                "raised multiplicities need {extra} extra knots, only {interior_total} interior slots"
            )));
        }
        let distinct = interior_total - extra;
        let spans = distinct + 1;
        let grid = |i: usize| i as f64 / spans as f64;
        for &(v, _) in raised {
            let nearest = (v * spans as f64).round();
            if (v - nearest / spans as f64).abs() > GRID_TOL
                || nearest < 1.0
                || nearest as usize >= spans
            {
                return Err(SplineError::InvalidKnots(format!(
                    "raised knot {v} does not sit on the uniform grid with {spans} spans"
                )));
            }
        }
        let mut knots = vec![0.0; p + 1];
        for i in 1..spans {
            let v = grid(i);
            let mult = raised
                .iter()
                .find(|&&(rv, _)| (rv - v).abs() <= GRID_TOL)
                .map_or(1, |&(_, m)| m);
            for _ in 0..mult {
                knots.push(v);
            }
        }
        knots.extend(std::iter::repeat(1.0).take(p + 1));
        debug_assert_eq!(knots.len(), n + p + 1);
        Ok(Self { knots, degree: p })
    }

    /// Wraps an explicit knot list, validating the clamped-open structure.
    pub fn from_knots(knots: Vec<f64>, p: usize) -> Result<Self> {
        if p == 0 || knots.len() < 2 * (p + 1) {
            return Err(SplineError::InvalidKnots(
                "need degree >= 1 and at least 2(p+1) knots".into(),
            ));
        }
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(SplineError::InvalidKnots("knots must be nondecreasing".into()));
        }
        if knots[..=p].iter().any(|&z| z != 0.0) || knots[knots.len() - p - 1..].iter().any(|&z| z != 1.0)
        {
            return Err(SplineError::InvalidKnots(
                "first and last p+1 knots must be 0 and 1".into(),
            ));
        }
        // Interior multiplicity cap keeps every basis function continuous.
        let interior = &knots[p + 1..knots.len() - p - 1];
        let mut run = 1usize;
        for w in interior.windows(2) {
            run = if w[0] == w[1] { run + 1 } else { 1 };
            if run > p {
                return Err(SplineError::InvalidKnots(format!(
                    "interior knot {} exceeds multiplicity p = {p}",
                    w[0]
                )));
            }
        }
        Ok(Self { knots, degree: p })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Basis size `n = #knots - p - 1`.
    pub fn basis_len(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Distinct knot values, in order: the span boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![self.knots[0]];
        for &z in &self.knots {
            if z > *out.last().expect("non-empty") {
                out.push(z);
            }
        }
        out
    }
}
