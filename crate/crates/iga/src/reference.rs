//! Dense single-parameter reference discretization.
//!
//! For a fixed parameter value this module assembles the same Galerkin
//! system as the TT pipeline but by entirely conventional means: pointwise
//! Jacobians at quadrature points, banded accumulation into sparse
//! matrices, and direct or CG solves. It shares only the spline primitives
//! and the fitted control points with the TT path, so agreement between
//! the two is a meaningful check of the tensor algebra, not a tautology.

use ndarray::{Array1, Array2, Array3, Axis};
use tt_core::linalg::LuFactor;
use tt_core::{TTMatrix, TTTensor};

use splines::{collocation_matrix, BSplineBasis, QuadratureGrid};

use crate::error::{IgaError, Result};
use crate::geometry::{GeometryMap, MapFn, ScalarFn};
use crate::modes::contract_trailing;
use crate::problem::BVPProblem;

/// Compressed sparse row matrix, sized for the banded systems produced
/// here (a few hundred nonzeros per row).
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            out[r] = acc;
        }
        out
    }

    /// `x' A y`.
    pub fn quadratic(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, self.n));
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out[(r, self.indices[k])] += self.data[k];
            }
        }
        out
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.indices[k] == r {
                    d[r] += self.data[k];
                }
            }
        }
        d
    }

    /// Same-pattern linear combination `self + s * other`.
    fn axpy_pattern(&self, s: f64, other: &Csr) -> Csr {
        assert_eq!(self.indptr, other.indptr);
        assert_eq!(self.indices, other.indices);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + s * b)
            .collect();
        Csr { n: self.n, indptr: self.indptr.clone(), indices: self.indices.clone(), data }
    }

    /// Interior restriction `P A P + (I - P)` for a 0/1 interior mask.
    fn restricted(&self, interior: &[bool]) -> Csr {
        let mut indptr = Vec::with_capacity(self.n + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for r in 0..self.n {
            if interior[r] {
                for k in self.indptr[r]..self.indptr[r + 1] {
                    let c = self.indices[k];
                    if interior[c] {
                        indices.push(c);
                        data.push(self.data[k]);
                    }
                }
            } else {
                indices.push(r);
                data.push(1.0);
            }
            indptr.push(indices.len());
        }
        Csr { n: self.n, indptr, indices, data }
    }
}

/// Per-mode quadrature tables: point locations, weights, and the values
/// and first derivatives of the `p + 1` active basis functions.
struct ModeTable {
    points: Vec<f64>,
    weights: Vec<f64>,
    start: Vec<usize>,
    val: Vec<Vec<f64>>,
    der: Vec<Vec<f64>>,
    n: usize,
    p: usize,
}

fn mode_table(basis: &BSplineBasis) -> Result<ModeTable> {
    let quad = QuadratureGrid::for_basis(basis);
    let mut start = Vec::with_capacity(quad.len());
    let mut val = Vec::with_capacity(quad.len());
    let mut der = Vec::with_capacity(quad.len());
    for &x in quad.points() {
        let (s, v) = basis.eval_nonzero(x)?;
        let (s2, d) = basis.eval_nonzero_deriv(x)?;
        debug_assert_eq!(s, s2);
        start.push(s);
        val.push(v);
        der.push(d);
    }
    Ok(ModeTable {
        points: quad.points().to_vec(),
        weights: quad.weights().to_vec(),
        start,
        val,
        der,
        n: basis.len(),
        p: basis.degree(),
    })
}

/// Contracts a local `(p0+1) x (p1+1) x (p2+1)` control cube with one
/// vector per axis.
fn cube_contract(
    control: &Array3<f64>,
    s: [usize; 3],
    u0: &[f64],
    u1: &[f64],
    u2: &[f64],
) -> f64 {
    let mut acc = 0.0;
    for (a, &ua) in u0.iter().enumerate() {
        for (b, &ub) in u1.iter().enumerate() {
            let mut inner = 0.0;
            for (c, &uc) in u2.iter().enumerate() {
                inner += uc * control[(s[0] + a, s[1] + b, s[2] + c)];
            }
            acc += ua * ub * inner;
        }
    }
    acc
}

fn det3(j: &[[f64; 3]; 3]) -> f64 {
    j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
}

fn inv3(j: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        for c in 0..3 {
            let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
            // Adjugate: transposed cofactors.
            inv[c][r] = (j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]) / det;
        }
    }
    inv
}

/// Spatial control net of the fitted geometry at one parameter value.
pub fn control_at_theta(geo: &GeometryMap, theta: &[f64]) -> Result<[Array3<f64>; 3]> {
    let grid = geo.grid();
    let vecs: Vec<Vec<f64>> = (0..grid.dims())
        .map(|k| grid.interp_vector(k, theta[k]))
        .collect();
    let refs: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
    let mut out = Vec::with_capacity(3);
    for s in 0..3 {
        let slice = contract_trailing(geo.control(s), 3, &refs)?;
        let dense = slice.to_dense()?;
        let shape = dense.shape().to_vec();
        let arr = Array3::from_shape_vec(
            (shape[0], shape[1], shape[2]),
            dense.data().to_vec(),
        )
        .expect("dense tensor is C-ordered");
        out.push(arr);
    }
    Ok(out.try_into().expect("three components"))
}

/// Mass and stiffness matrices at one parameter value, assembled with
/// pointwise Jacobians. The stiffness includes the diffusion coefficient.
pub fn reference_matrices(
    problem: &BVPProblem,
    geo: &GeometryMap,
    theta: &[f64],
) -> Result<(Csr, Csr)> {
    let control = control_at_theta(geo, theta)?;
    let tables: Vec<ModeTable> = geo
        .bases()
        .iter()
        .map(mode_table)
        .collect::<Result<_>>()?;
    let dims = [tables[0].n, tables[1].n, tables[2].n];
    let degs = [tables[0].p, tables[1].p, tables[2].p];
    let total: usize = dims.iter().product();
    let widths = [2 * degs[0] + 1, 2 * degs[1] + 1, 2 * degs[2] + 1];
    let band_cols: usize = widths.iter().product();
    let mut mass_band = Array2::<f64>::zeros((total, band_cols));
    let mut stiff_band = Array2::<f64>::zeros((total, band_cols));

    let nloc = (degs[0] + 1) * (degs[1] + 1) * (degs[2] + 1);
    let mut bval = vec![0.0; nloc];
    let mut gphys = vec![[0.0; 3]; nloc];

    for i0 in 0..tables[0].points.len() {
        for i1 in 0..tables[1].points.len() {
            for i2 in 0..tables[2].points.len() {
                let t = [&tables[0], &tables[1], &tables[2]];
                let y = [t[0].points[i0], t[1].points[i1], t[2].points[i2]];
                let w = t[0].weights[i0] * t[1].weights[i1] * t[2].weights[i2];
                let s = [t[0].start[i0], t[1].start[i1], t[2].start[i2]];
                let (v0, v1, v2) = (&t[0].val[i0], &t[1].val[i1], &t[2].val[i2]);
                let (d0, d1, d2) = (&t[0].der[i0], &t[1].der[i1], &t[2].der[i2]);

                let mut jac = [[0.0; 3]; 3];
                for comp in 0..3 {
                    jac[comp][0] = cube_contract(&control[comp], s, d0, v1, v2);
                    jac[comp][1] = cube_contract(&control[comp], s, v0, d1, v2);
                    jac[comp][2] = cube_contract(&control[comp], s, v0, v1, d2);
                }
                let det = det3(&jac);
                if det <= 0.0 {
                    return Err(IgaError::Degenerate(format!(
                        "non-positive Jacobian determinant {det:.3e} at y = {y:?}"
                    )));
                }
                let inv = inv3(&jac, det);
                let x = (problem.map)(&y, theta);
                let kv = problem.kappa.eval(&y, &x, theta);

                // Local basis values and physical gradients.
                let mut li = 0;
                for (a0, (&va, &da)) in v0.iter().zip(d0).enumerate() {
                    let _ = a0;
                    for (&vb, &db) in v1.iter().zip(d1) {
                        for (&vc, &dc) in v2.iter().zip(d2) {
                            bval[li] = va * vb * vc;
                            let gy = [da * vb * vc, va * db * vc, va * vb * dc];
                            for c in 0..3 {
                                // grad_x = J^{-T} grad_y
                                gphys[li][c] =
                                    inv[0][c] * gy[0] + inv[1][c] * gy[1] + inv[2][c] * gy[2];
                            }
                            li += 1;
                        }
                    }
                }

                let wm = w * det;
                let ws = w * det * kv;
                let local_dims = [degs[0] + 1, degs[1] + 1, degs[2] + 1];
                for la in 0..nloc {
                    let a0 = la / (local_dims[1] * local_dims[2]);
                    let a1 = (la / local_dims[2]) % local_dims[1];
                    let a2 = la % local_dims[2];
                    let row = ((s[0] + a0) * dims[1] + s[1] + a1) * dims[2] + s[2] + a2;
                    for lb in 0..nloc {
                        let b0 = lb / (local_dims[1] * local_dims[2]);
                        let b1 = (lb / local_dims[2]) % local_dims[1];
                        let b2 = lb % local_dims[2];
                        let off = ((b0 + degs[0] - a0) * widths[1] + b1 + degs[1] - a1)
                            * widths[2]
                            + b2
                            + degs[2]
                            - a2;
                        let ga = &gphys[la];
                        let gb = &gphys[lb];
                        mass_band[(row, off)] += wm * bval[la] * bval[lb];
                        stiff_band[(row, off)] +=
                            ws * (ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2]);
                    }
                }
            }
        }
    }

    let mass = band_to_csr(&mass_band, dims, degs);
    let stiff = band_to_csr(&stiff_band, dims, degs);
    Ok((mass, stiff))
}

fn band_to_csr(band: &Array2<f64>, dims: [usize; 3], degs: [usize; 3]) -> Csr {
    let widths = [2 * degs[0] + 1, 2 * degs[1] + 1, 2 * degs[2] + 1];
    let total = band.nrows();
    let mut indptr = Vec::with_capacity(total + 1);
    let mut indices = Vec::new();
    let mut data = Vec::new();
    indptr.push(0);
    for row in 0..total {
        let a0 = row / (dims[1] * dims[2]);
        let a1 = (row / dims[2]) % dims[1];
        let a2 = row % dims[2];
        for off in 0..band.ncols() {
            let v = band[(row, off)];
            if v == 0.0 {
                continue;
            }
            let d0 = off / (widths[1] * widths[2]);
            let d1 = (off / widths[2]) % widths[1];
            let d2 = off % widths[2];
            let b0 = a0 as isize + d0 as isize - degs[0] as isize;
            let b1 = a1 as isize + d1 as isize - degs[1] as isize;
            let b2 = a2 as isize + d2 as isize - degs[2] as isize;
            debug_assert!(b0 >= 0 && (b0 as usize) < dims[0]);
            debug_assert!(b1 >= 0 && (b1 as usize) < dims[1]);
            debug_assert!(b2 >= 0 && (b2 as usize) < dims[2]);
            let col = ((b0 as usize) * dims[1] + b1 as usize) * dims[2] + b2 as usize;
            indices.push(col);
            data.push(v);
        }
        indptr.push(indices.len());
    }
    Csr { n: total, indptr, indices, data }
}

/// Interpolation coefficients of a scalar function at one parameter value,
/// computed densely: values on the Greville grid, then one collocation
/// solve per axis.
pub fn dense_interpolant(
    f: &ScalarFn,
    map: &MapFn,
    bases: &[BSplineBasis; 3],
    theta: &[f64],
) -> Result<Array3<f64>> {
    let grev: Vec<Vec<f64>> = bases.iter().map(|b| b.greville()).collect();
    let dims = (grev[0].len(), grev[1].len(), grev[2].len());
    let mut vals = Array3::zeros(dims);
    for (i, &gy0) in grev[0].iter().enumerate() {
        for (j, &gy1) in grev[1].iter().enumerate() {
            for (k, &gy2) in grev[2].iter().enumerate() {
                let y = [gy0, gy1, gy2];
                let x = map(&y, theta);
                vals[(i, j, k)] = f(&y, &x, theta);
            }
        }
    }
    for axis in 0..3 {
        let b = collocation_matrix(&bases[axis], &grev[axis])?;
        let lu = LuFactor::new(b.view())
            .map_err(|_| IgaError::Degenerate("singular collocation matrix".into()))?;
        vals = dense_mode_solve(&vals, axis, &lu)?;
    }
    Ok(vals)
}

fn dense_mode_solve(vals: &Array3<f64>, axis: usize, lu: &LuFactor) -> Result<Array3<f64>> {
    let mut order = [0usize; 3];
    order[0] = axis;
    let mut pos = 1;
    for k in 0..3 {
        if k != axis {
            order[pos] = k;
            pos += 1;
        }
    }
    let permuted = vals
        .view()
        .permuted_axes(order)
        .as_standard_layout()
        .into_owned();
    let (m, r1, r2) = permuted.dim();
    let flat = permuted
        .into_shape_with_order((m, r1 * r2))
        .expect("contiguous");
    let solved = lu
        .solve_mat(flat.view())
        .ok_or_else(|| IgaError::Degenerate("singular collocation matrix".into()))?;
    let back = solved
        .into_shape_with_order((m, r1, r2))
        .expect("sized by construction");
    // Invert the permutation.
    let mut inverse = [0usize; 3];
    for (i, &o) in order.iter().enumerate() {
        inverse[o] = i;
    }
    Ok(back
        .permuted_axes(inverse)
        .as_standard_layout()
        .into_owned())
}

/// Jacobi-preconditioned conjugate gradients; `None` when the relative
/// residual did not reach `tol` within `max_iter` steps.
fn cg_jacobi(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>> {
    let n = b.len();
    let diag = a.diagonal();
    let minv: Vec<f64> = diag
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Some(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(ri, mi)| ri * mi).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..max_iter {
        let ap = a.matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return None;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * bnorm {
            return Some(x);
        }
        for i in 0..n {
            z[i] = r[i] * minv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    None
}

/// Banded LU with partial pivoting, LAPACK-style storage: `kl` extra fill
/// rows on top of the `kl + ku + 1` band diagonals.
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Array2<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// `entries` yields `(row, col, value)` with `|row - col| <= kl`.
    fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entries: impl Iterator<Item = (usize, usize, f64)>,
    ) -> Option<Self> {
        let ldab = 2 * kl + ku + 1;
        let mut ab = Array2::<f64>::zeros((ldab, n));
        for (r, c, v) in entries {
            // A(r, c) lives at ab[kl + ku + r - c, c]; r - c is in [-ku, kl].
            ab[(kl + ku + r - c, c)] += v;
        }
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // Pivot search in column j over rows j..=j+km.
            let mut piv = 0;
            let mut pmax = ab[(kl + ku, j)].abs();
            for i in 1..=km {
                let v = ab[(kl + ku + i, j)].abs();
                if v > pmax {
                    pmax = v;
                    piv = i;
                }
            }
            if pmax == 0.0 {
                return None;
            }
            ipiv[j] = j + piv;
            let jmax = (j + ku + kl).min(n - 1);
            if piv > 0 {
                for c in j..=jmax {
                    let a = kl + ku + j - c;
                    let b = kl + ku + j + piv - c;
                    ab.swap((a, c), (b, c));
                }
            }
            let pivot = ab[(kl + ku, j)];
            for i in 1..=km {
                let m = ab[(kl + ku + i, j)] / pivot;
                ab[(kl + ku + i, j)] = m;
                if m != 0.0 {
                    for c in j + 1..=jmax {
                        let upper = ab[(kl + ku + j - c, c)];
                        if upper != 0.0 {
                            ab[(kl + ku + j + i - c, c)] -= m * upper;
                        }
                    }
                }
            }
        }
        Some(Self { n, kl, ku, ab, ipiv })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            for i in 1..=km {
                x[j + i] -= self.ab[(kl + ku + i, j)] * x[j];
            }
        }
        for j in (0..n).rev() {
            let start = j.saturating_sub(ku + kl);
            x[j] /= self.ab[(kl + ku, j)];
            for r in start..j {
                x[r] -= self.ab[(kl + ku + r - j, j)] * x[j];
            }
        }
        x
    }
}

/// Flattening permutation that puts the largest mode slowest, which
/// minimizes the bandwidth of the permuted operator.
fn size_ordered_permutation(dims: [usize; 3]) -> Vec<usize> {
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&k| std::cmp::Reverse(dims[k]));
    let pdims = [dims[order[0]], dims[order[1]], dims[order[2]]];
    let total = dims.iter().product();
    let mut sigma = vec![0usize; total];
    for (g, slot) in sigma.iter_mut().enumerate() {
        let a = [g / (dims[1] * dims[2]), (g / dims[2]) % dims[1], g % dims[2]];
        *slot = (a[order[0]] * pdims[1] + a[order[1]]) * pdims[2] + a[order[2]];
    }
    sigma
}

fn banded_solve(a: &Csr, b: &[f64], dims: [usize; 3]) -> Option<Vec<f64>> {
    let sigma = size_ordered_permutation(dims);
    let mut bw = 0usize;
    for r in 0..a.n {
        for k in a.indptr[r]..a.indptr[r + 1] {
            let c = a.indices[k];
            bw = bw.max(sigma[r].abs_diff(sigma[c]));
        }
    }
    let sigma_ref = &sigma;
    let entries = (0..a.n).flat_map(move |r| {
        (a.indptr[r]..a.indptr[r + 1])
            .map(move |k| (sigma_ref[r], sigma_ref[a.indices[k]], a.data[k]))
    });
    let lu = BandLu::factor(a.n, bw, bw, entries)?;
    let mut pb = vec![0.0; a.n];
    for (g, &v) in b.iter().enumerate() {
        pb[sigma[g]] = v;
    }
    let px = lu.solve(&pb);
    let mut x = vec![0.0; a.n];
    for (g, &sg) in sigma.iter().enumerate() {
        x[g] = px[sg];
    }
    Some(x)
}

/// The dense solution at one parameter value plus the matrices needed to
/// measure distances against it.
pub struct ThetaReference {
    pub coeffs: Vec<f64>,
    pub mass: Csr,
    pub stiffness: Csr,
}

impl ThetaReference {
    /// `sqrt(d' M d)` for a coefficient difference `d`.
    pub fn mass_norm(&self, d: &[f64]) -> f64 {
        self.mass.quadratic(d, d).max(0.0).sqrt()
    }
}

/// Solves the problem at one parameter value with the dense machinery:
/// same discrete space and the same lifting convention as the TT solve, so
/// the two solutions agree to solver accuracy.
pub fn reference_solve(
    problem: &BVPProblem,
    geo: &GeometryMap,
    theta: &[f64],
    tol: f64,
) -> Result<ThetaReference> {
    let (mass, stiff) = reference_matrices(problem, geo, theta)?;
    let dims = [
        geo.bases()[0].len(),
        geo.bases()[1].len(),
        geo.bases()[2].len(),
    ];
    let total: usize = dims.iter().product();

    // Same sign convention as the TT pipeline: (S - rho M) u = -M fhat.
    let op = if problem.rho != 0.0 {
        stiff.axpy_pattern(-problem.rho, &mass)
    } else {
        stiff.clone()
    };

    let masks = problem.faces.masks(dims);
    let interior: Vec<bool> = (0..total)
        .map(|g| {
            let a = [g / (dims[1] * dims[2]), (g / dims[2]) % dims[1], g % dims[2]];
            (0..3).all(|s| masks[s][a[s]] != 0.0)
        })
        .collect();

    let lift: Vec<f64> = match &problem.boundary_data {
        Some(g) if problem.faces.any() => {
            let ghat = dense_interpolant(g, &problem.map, geo.bases(), theta)?;
            let flat = ghat.into_raw_vec_and_offset().0;
            (0..total)
                .map(|g| if interior[g] { 0.0 } else { flat[g] })
                .collect()
        }
        _ => vec![0.0; total],
    };

    let mut rhs = match &problem.source {
        Some(f) => {
            let fhat = dense_interpolant(f, &problem.map, geo.bases(), theta)?;
            let flat = fhat.into_raw_vec_and_offset().0;
            mass.matvec(&flat).iter().map(|v| -v).collect()
        }
        None => vec![0.0; total],
    };
    let shift = op.matvec(&lift);
    for g in 0..total {
        rhs[g] = if interior[g] { rhs[g] - shift[g] } else { 0.0 };
    }

    let restricted = op.restricted(&interior);
    let x = if problem.rho == 0.0 {
        cg_jacobi(&restricted, &rhs, tol, 50 * total)
            .ok_or_else(|| IgaError::Degenerate("reference CG did not converge".into()))?
    } else {
        banded_solve(&restricted, &rhs, dims)
            .ok_or_else(|| IgaError::Degenerate("reference banded LU broke down".into()))?
    };

    let coeffs = x.iter().zip(&lift).map(|(a, b)| a + b).collect();
    Ok(ThetaReference { coeffs, mass, stiffness: stiff })
}

/// Dense spatial block of a TT operator at one parameter grid point: the
/// parameter cores are sliced on their diagonal and folded into the third
/// spatial core.
pub fn operator_block(op: &TTMatrix, pidx: &[usize]) -> Result<Array2<f64>> {
    let d = op.ndim();
    if pidx.len() + 3 != d {
        return Err(IgaError::Invalid(format!(
            "{} parameter indices for a {}-mode operator",
            pidx.len(),
            d
        )));
    }
    let cores = op.cores();
    let mut right = Array1::from_elem(1, 1.0);
    for k in (3..d).rev() {
        let q = pidx[k - 3];
        let slice = cores[k].index_axis(Axis(1), q);
        let slice = slice.index_axis(Axis(1), q);
        right = slice.dot(&right);
    }
    let c = &cores[2];
    let (r, m, n, r2) = c.dim();
    let mut folded = ndarray::Array4::zeros((r, m, n, 1));
    for a in 0..r {
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for b in 0..r2 {
                    acc += c[(a, i, j, b)] * right[b];
                }
                folded[(a, i, j, 0)] = acc;
            }
        }
    }
    let spatial = TTMatrix::new(vec![cores[0].clone(), cores[1].clone(), folded])?;
    Ok(spatial.full_matrix()?)
}

/// Spatial coefficient vector of a TT field at one parameter grid point,
/// flattened in row-major order.
pub fn tensor_slice_vec(t: &TTTensor, grid_vecs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let refs: Vec<&[f64]> = grid_vecs.iter().map(|v| v.as_slice()).collect();
    let slice = contract_trailing(t, 3, &refs)?;
    Ok(slice.to_dense()?.data().to_vec())
}
