//! Point evaluation, parameter slicing, persistence and error norms of a
//! solved field.
//!
//! A [`SolutionField`] is a TT coefficient tensor over the joint grid
//! `basis x basis x basis x nodes x ... x nodes` together with the bases
//! and the parameter grid needed to interpret it. Evaluation between
//! parameter nodes uses the barycentric interpolant of [`ParamGrid`], so
//! the field is a genuine function of `(y, theta)`.

use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tt_core::{load_tensor, save_tensor, TTTensor};

use splines::{BSplineBasis, KnotVector};

use crate::assemble::assemble_mass;
use crate::error::{IgaError, Result};
use crate::geometry::{GeometryMap, MapFn, ScalarFn};
use crate::metric::Metric;
use crate::modes::{bilinear_form, contract_all, contract_trailing};
use crate::param::ParamGrid;

pub struct SolutionField {
    bases: [BSplineBasis; 3],
    grid: ParamGrid,
    coeffs: TTTensor,
}

impl SolutionField {
    pub fn new(bases: [BSplineBasis; 3], grid: ParamGrid, coeffs: TTTensor) -> Result<Self> {
        let mut expect: Vec<usize> = bases.iter().map(|b| b.len()).collect();
        expect.extend(grid.levels());
        if coeffs.shape() != expect {
            return Err(IgaError::Invalid(format!(
                "coefficient shape {:?} does not match bases and grid {:?}",
                coeffs.shape(),
                expect
            )));
        }
        Ok(Self { bases, grid, coeffs })
    }

    pub fn bases(&self) -> &[BSplineBasis; 3] {
        &self.bases
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &TTTensor {
        &self.coeffs
    }

    fn contraction_vectors(&self, y: &[f64; 3], theta: &[f64]) -> Result<Vec<Vec<f64>>> {
        if theta.len() != self.grid.dims() {
            return Err(IgaError::Invalid(format!(
                "{} parameters for a {}-parameter field",
                theta.len(),
                self.grid.dims()
            )));
        }
        let mut vecs = Vec::with_capacity(3 + theta.len());
        for s in 0..3 {
            vecs.push(self.bases[s].eval_all(y[s])?);
        }
        for k in 0..theta.len() {
            vecs.push(self.grid.interp_vector(k, theta[k]));
        }
        Ok(vecs)
    }

    /// Field value at reference point `y`, parameter `theta`.
    pub fn eval(&self, y: &[f64; 3], theta: &[f64]) -> Result<f64> {
        let vecs = self.contraction_vectors(y, theta)?;
        let refs: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
        contract_all(&self.coeffs, &refs)
    }

    /// Value and gradient with respect to the reference coordinates.
    pub fn eval_with_grad(&self, y: &[f64; 3], theta: &[f64]) -> Result<(f64, [f64; 3])> {
        let vecs = self.contraction_vectors(y, theta)?;
        let refs: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
        let value = contract_all(&self.coeffs, &refs)?;
        let mut grad = [0.0; 3];
        for s in 0..3 {
            let dv = self.bases[s].eval_all_deriv(y[s])?;
            let swapped: Vec<&[f64]> = refs
                .iter()
                .enumerate()
                .map(|(k, &v)| if k == s { dv.as_slice() } else { v })
                .collect();
            grad[s] = contract_all(&self.coeffs, &swapped)?;
        }
        Ok((value, grad))
    }

    /// Value and physical-space gradient: solves `J^T g_x = g_y` with the
    /// Jacobian of the fitted geometry.
    pub fn eval_with_phys_grad(
        &self,
        geo: &GeometryMap,
        y: &[f64; 3],
        theta: &[f64],
    ) -> Result<(f64, [f64; 3])> {
        let (value, gy) = self.eval_with_grad(y, theta)?;
        let j = geo.jacobian(y, theta)?;
        let mut jt = Array2::zeros((3, 3));
        for s in 0..3 {
            for t in 0..3 {
                jt[(t, s)] = j[s][t];
            }
        }
        let gx = tt_core::linalg::solve_lu(jt.view(), &gy)
            .ok_or_else(|| IgaError::Degenerate("jacobian is singular at sample point".into()))?;
        Ok((value, [gx[0], gx[1], gx[2]]))
    }

    /// Spatial coefficient tensor at a fixed parameter value: the trailing
    /// parameter modes are contracted with interpolation vectors.
    pub fn at_theta(&self, theta: &[f64]) -> Result<TTTensor> {
        if theta.len() != self.grid.dims() {
            return Err(IgaError::Invalid("wrong parameter count".into()));
        }
        let vecs: Vec<Vec<f64>> = (0..theta.len())
            .map(|k| self.grid.interp_vector(k, theta[k]))
            .collect();
        let refs: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
        contract_trailing(&self.coeffs, 3, &refs)
    }

    /// Writes the coefficient container to `path` and a JSON sidecar with
    /// the bases and grid to `path` + `.json`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        save_tensor(&self.coeffs, path)?;
        let meta = FieldMeta {
            degrees: [0, 1, 2].map(|s: usize| self.bases[s].degree()),
            knots: [0, 1, 2].map(|s: usize| self.bases[s].knot_vector().knots().to_vec()),
            intervals: self.grid.intervals().to_vec(),
            levels: self.grid.levels(),
        };
        let json = serde_json::to_string_pretty(&meta)
            .map_err(|e| IgaError::BadFile(e.to_string()))?;
        std::fs::write(sidecar(path), json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let coeffs = load_tensor(path)?;
        let raw = std::fs::read_to_string(sidecar(path))?;
        let meta: FieldMeta =
            serde_json::from_str(&raw).map_err(|e| IgaError::BadFile(e.to_string()))?;
        let mut bases = Vec::with_capacity(3);
        for s in 0..3 {
            let kv = KnotVector::from_knots(meta.knots[s].clone(), meta.degrees[s])?;
            bases.push(BSplineBasis::new(kv));
        }
        let grid = ParamGrid::new(&meta.intervals, &meta.levels)?;
        Self::new(bases.try_into().expect("three bases"), grid, coeffs)
    }
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    std::path::PathBuf::from(s)
}

#[derive(Serialize, Deserialize)]
struct FieldMeta {
    degrees: [usize; 3],
    knots: [Vec<f64>; 3],
    intervals: Vec<(f64, f64)>,
    levels: Vec<usize>,
}

/// Errors of a field against a known solution. `l2_rel` integrates over
/// both the physical domain and the parameter box (Gauss weights in
/// theta); `max_rel` is a sampled sup-norm estimate.
#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub l2_rel: f64,
    pub max_rel: f64,
}

/// Compares against the spline interpolant of `exact` in the L2 norm and
/// against `exact` itself pointwise at `samples` random `(y, theta)` draws.
pub fn error_vs_exact(
    field: &SolutionField,
    exact: &ScalarFn,
    map: &MapFn,
    metric: &Metric,
    fit: &crate::geometry::FitOptions,
    samples: usize,
    seed: u64,
) -> Result<ErrorNorms> {
    let reference =
        crate::geometry::fit_coefficients(exact, map, field.bases(), field.grid(), fit)?;
    let diff = field.coeffs().sub(&reference)?.round(1e-14);

    // Mass matrix with Gauss weights on the parameter modes turns the
    // coefficient quadratic form into the L2(domain x parameter) norm.
    let mass = assemble_mass(metric, 1e-12)?;
    let grid = field.grid();
    let weight_vecs: Vec<Vec<f64>> = (0..grid.dims()).map(|k| grid.weights(k).to_vec()).collect();
    let row_vecs: Vec<Option<&[f64]>> = (0..mass.ndim())
        .map(|k| {
            if k < 3 {
                None
            } else {
                Some(weight_vecs[k - 3].as_slice())
            }
        })
        .collect();
    let col_vecs: Vec<Option<&[f64]>> = vec![None; mass.ndim()];
    let weighted = mass.scale_modes(&row_vecs, &col_vecs)?;

    let err_sq = bilinear_form(&weighted, &diff, &diff)?;
    let ref_sq = bilinear_form(&weighted, &reference, &reference)?;
    if ref_sq <= 0.0 {
        return Err(IgaError::Invalid("reference solution has zero norm".into()));
    }
    let l2_rel = (err_sq.max(0.0) / ref_sq).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for _ in 0..samples {
        let y = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        let theta: Vec<f64> = (0..grid.dims())
            .map(|k| {
                let (a, b) = grid.interval(k);
                rng.gen_range(a..b)
            })
            .collect();
        let x = map(&y, &theta);
        let want = exact(&y, &x, &theta);
        let got = field.eval(&y, &theta)?;
        worst = worst.max((got - want).abs());
        scale = scale.max(want.abs());
    }
    if scale == 0.0 {
        return Err(IgaError::Invalid("exact solution vanishes at every sample".into()));
    }
    Ok(ErrorNorms { l2_rel, max_rel: worst / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_field() -> SolutionField {
        let bases: [BSplineBasis; 3] = [
            BSplineBasis::open_uniform(5, 2).unwrap(),
            BSplineBasis::open_uniform(4, 2).unwrap(),
            BSplineBasis::open_uniform(5, 1).unwrap(),
        ];
        let grid = ParamGrid::new(&[(0.0, 1.0), (-1.0, 1.0)], &[3, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let coeffs = TTTensor::random_with(&[5, 4, 5, 3, 2], 3, || rng.gen_range(-1.0..1.0));
        SolutionField::new(bases, grid, coeffs).unwrap()
    }

    #[test]
    fn at_theta_slice_agrees_with_pointwise_eval() {
        let f = small_field();
        let theta = [0.37, 0.21];
        let slice = f.at_theta(&theta).unwrap();
        for y in [[0.1, 0.5, 0.9], [0.62, 0.33, 0.05]] {
            let direct = f.eval(&y, &theta).unwrap();
            let vecs: Vec<Vec<f64>> =
                (0..3).map(|s| f.bases()[s].eval_all(y[s]).unwrap()).collect();
            let refs: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
            let via_slice = contract_all(&slice, &refs).unwrap();
            assert_abs_diff_eq!(direct, via_slice, epsilon = 1e-12);
        }
    }

    #[test]
    fn reference_gradient_matches_finite_differences() {
        let f = small_field();
        let y = [0.4, 0.6, 0.3];
        let theta = [0.5, -0.2];
        let (_, grad) = f.eval_with_grad(&y, &theta).unwrap();
        let h = 1e-6;
        for s in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[s] += h;
            ym[s] -= h;
            let fd =
                (f.eval(&yp, &theta).unwrap() - f.eval(&ym, &theta).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(grad[s], fd, epsilon = 1e-5 * grad[s].abs().max(1.0));
        }
    }

    #[test]
    fn save_load_roundtrip_preserves_values() {
        let f = small_field();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.tt");
        f.save(&path).unwrap();
        let g = SolutionField::load(&path).unwrap();
        let theta = [0.3, 0.8];
        for y in [[0.2, 0.4, 0.6], [0.9, 0.1, 0.5]] {
            assert_abs_diff_eq!(
                f.eval(&y, &theta).unwrap(),
                g.eval(&y, &theta).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn rejects_mismatched_coefficients() {
        let bases: [BSplineBasis; 3] = [
            BSplineBasis::open_uniform(5, 2).unwrap(),
            BSplineBasis::open_uniform(4, 2).unwrap(),
            BSplineBasis::open_uniform(5, 1).unwrap(),
        ];
        let grid = ParamGrid::new(&[(0.0, 1.0)], &[3]).unwrap();
        let coeffs = TTTensor::ones(&[5, 4, 5, 2]);
        assert!(SolutionField::new(bases, grid, coeffs).is_err());
    }
}
