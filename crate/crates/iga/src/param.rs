use splines::gauss_legendre;

use crate::error::{IgaError, Result};

/// Collocation grid over the parameter box `Xi_1 x ... x Xi_Np`.
///
/// Each direction carries the Gauss-Legendre nodes of its interval. The
/// nodes double as interpolation abscissae: a solution tensor holds values
/// at the nodes, and off-node parameter values are recovered by barycentric
/// Lagrange interpolation, which is exact for polynomials of degree below
/// the node count. The Gauss weights serve parameter-space integrals.
#[derive(Debug, Clone)]
pub struct ParamGrid {
    intervals: Vec<(f64, f64)>,
    nodes: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    bary: Vec<Vec<f64>>,
}

impl ParamGrid {
    pub fn new(intervals: &[(f64, f64)], levels: &[usize]) -> Result<Self> {
        if intervals.len() != levels.len() {
            return Err(IgaError::Invalid(format!(
                "{} parameter intervals but {} node counts",
                intervals.len(),
                levels.len()
            )));
        }
        if intervals.is_empty() {
            return Err(IgaError::Invalid("at least one parameter required".into()));
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut bary = Vec::new();
        for (&(a, b), &l) in intervals.iter().zip(levels) {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(IgaError::Invalid(format!("bad parameter interval [{a}, {b}]")));
            }
            if l == 0 {
                return Err(IgaError::Invalid("node count must be at least 1".into()));
            }
            let (xr, wr) = gauss_legendre(l);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let x: Vec<f64> = xr.iter().map(|&t| mid + half * t).collect();
            let w: Vec<f64> = wr.iter().map(|&t| half * t).collect();
            bary.push(bary_weights(&x));
            nodes.push(x);
            weights.push(w);
        }
        Ok(Self { intervals: intervals.to_vec(), nodes, weights, bary })
    }

    pub fn dims(&self) -> usize {
        self.intervals.len()
    }

    pub fn levels(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.len()).collect()
    }

    pub fn interval(&self, k: usize) -> (f64, f64) {
        self.intervals[k]
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn nodes(&self, k: usize) -> &[f64] {
        &self.nodes[k]
    }

    pub fn weights(&self, k: usize) -> &[f64] {
        &self.weights[k]
    }

    /// Interval midpoints; the representative "nominal" parameter value.
    pub fn nominal(&self) -> Vec<f64> {
        self.intervals.iter().map(|&(a, b)| 0.5 * (a + b)).collect()
    }

    /// Cardinal values `L_i(theta)` of the Lagrange basis through the
    /// direction-`k` nodes. Exactly the unit vector when `theta` is a node.
    pub fn interp_vector(&self, k: usize, theta: f64) -> Vec<f64> {
        let x = &self.nodes[k];
        let w = &self.bary[k];
        let mut out = vec![0.0; x.len()];
        for (i, &xi) in x.iter().enumerate() {
            if theta == xi {
                out[i] = 1.0;
                return out;
            }
        }
        let mut denom = 0.0;
        for i in 0..x.len() {
            let t = w[i] / (theta - x[i]);
            out[i] = t;
            denom += t;
        }
        for v in &mut out {
            *v /= denom;
        }
        out
    }
}

/// Barycentric weights `1 / prod_{j != i} (x_i - x_j)`, rescaled by their
/// largest magnitude; the common factor cancels in the interpolation ratio.
fn bary_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] /= x[i] - x[j];
            }
        }
    }
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        for v in &mut w {
            *v /= scale;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nodes_and_weights_integrate_polynomials() {
        let g = ParamGrid::new(&[(-1.0, 3.0)], &[4]).unwrap();
        // integral of t^5 over [-1, 3] = (3^6 - 1)/6
        let exact = (3.0f64.powi(6) - 1.0) / 6.0;
        let got: f64 = g
            .nodes(0)
            .iter()
            .zip(g.weights(0))
            .map(|(&t, &w)| w * t.powi(5))
            .sum();
        assert_abs_diff_eq!(got, exact, epsilon = 1e-10);
    }

    #[test]
    fn interpolation_is_exact_below_the_node_count() {
        let g = ParamGrid::new(&[(0.0, 1.0)], &[5]).unwrap();
        let f = |t: f64| 1.0 - 2.0 * t + 3.0 * t.powi(3) - t.powi(4);
        let vals: Vec<f64> = g.nodes(0).iter().map(|&t| f(t)).collect();
        for &t in &[0.0, 0.123, 0.5, 0.987, 1.0] {
            let l = g.interp_vector(0, t);
            let got: f64 = l.iter().zip(&vals).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(got, f(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn interp_vector_is_cardinal_at_a_node() {
        let g = ParamGrid::new(&[(-0.05, 0.05)], &[3]).unwrap();
        let node = g.nodes(0)[1];
        let l = g.interp_vector(0, node);
        assert_eq!(l, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn single_node_grid_degenerates_to_the_midpoint() {
        let g = ParamGrid::new(&[(2.0, 4.0)], &[1]).unwrap();
        assert_abs_diff_eq!(g.nodes(0)[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.weights(0)[0], 2.0, epsilon = 1e-15);
        assert_eq!(g.interp_vector(0, 3.7), vec![1.0]);
    }

    #[test]
    fn bad_setups_are_rejected() {
        assert!(ParamGrid::new(&[(1.0, 1.0)], &[2]).is_err());
        assert!(ParamGrid::new(&[(0.0, 1.0)], &[0]).is_err());
        assert!(ParamGrid::new(&[(0.0, 1.0), (0.0, 1.0)], &[2]).is_err());
        assert!(ParamGrid::new(&[], &[]).is_err());
    }
}
