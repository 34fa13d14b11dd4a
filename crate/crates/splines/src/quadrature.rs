use crate::basis::BSplineBasis;
use crate::gauss::{gauss_legendre, map_to_interval};

/// Per-span Gauss-Legendre rule over the breakpoints of a basis, points
/// concatenated span by span in ascending order.
///
/// The default `q = p + 1` points per span integrate polynomials of degree
/// `2p + 1` exactly, which covers products of two basis functions; rational
/// integrands (geometry weights) are approximated at consistent order.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    span_edges: Vec<f64>,
    points_per_span: usize,
}

impl QuadratureGrid {
    /// Rule with `q = p + 1` points per span.
    pub fn for_basis(basis: &BSplineBasis) -> Self {
        Self::with_points_per_span(basis, basis.degree() + 1)
    }

    pub fn with_points_per_span(basis: &BSplineBasis, q: usize) -> Self {
        let edges = basis.breakpoints();
        let (nodes, base_w) = gauss_legendre(q);
        let mut points = Vec::with_capacity(q * (edges.len() - 1));
        let mut weights = Vec::with_capacity(points.capacity());
        for w in edges.windows(2) {
            let (xs, ws) = map_to_interval(&nodes, &base_w, w[0], w[1]);
            points.extend(xs);
            weights.extend(ws);
        }
        Self {
            points,
            weights,
            span_edges: edges,
            points_per_span: q,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn span_edges(&self) -> &[f64] {
        &self.span_edges
    }

    pub fn points_per_span(&self) -> usize {
        self.points_per_span
    }

    /// Integrates a callable against the rule.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}
