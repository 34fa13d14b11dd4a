//! Spline representation of parameter-dependent geometry maps.
//!
//! A map `G : [0,1]^3 x Xi -> R^3` enters as a black box. Each component is
//! cross-approximated on the Greville-times-parameter-node grid and the
//! resulting value tensor is turned into spline coefficients by solving the
//! univariate collocation system along every spatial mode. Everything
//! downstream (Jacobians, operators, solution evaluation) works off the
//! fitted control points, so the discrete problem stays consistent even
//! where the fit differs from the exact map.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splines::{collocation_matrix, BSplineBasis};
use tt_core::linalg::LuFactor;
use tt_core::TTTensor;
use tt_cross::{cross_interpolate, CrossOptions, FnOracle};

use crate::error::{IgaError, Result};
use crate::modes::{contract_all, mode_solve};
use crate::param::ParamGrid;

/// Black-box geometry map: reference point and parameter vector to a
/// physical point. Must be deterministic.
pub type MapFn = Arc<dyn Fn(&[f64; 3], &[f64]) -> [f64; 3] + Send + Sync>;

/// Black-box scalar field. Receives the reference point, its image under
/// the geometry map, and the parameter vector, so data may be given in
/// either coordinate system.
pub type ScalarFn = Arc<dyn Fn(&[f64; 3], &[f64; 3], &[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Cross-approximation validation tolerance, relative to the largest
    /// sampled magnitude.
    pub tol: f64,
    pub max_rank: usize,
    pub seed: u64,
    /// Random grid points used to double-check the finished fit.
    pub check_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_rank: 80, seed: 0x9e0, check_points: 200 }
    }
}

/// A geometry map fitted to the spline space: three coefficient tensors of
/// shape `(n_1, n_2, n_3, l_1, ..., l_Np)`.
#[derive(Clone)]
pub struct GeometryMap {
    bases: [BSplineBasis; 3],
    grid: ParamGrid,
    greville: [Vec<f64>; 3],
    control: [TTTensor; 3],
}

impl GeometryMap {
    pub fn bases(&self) -> &[BSplineBasis; 3] {
        &self.bases
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn greville(&self, k: usize) -> &[f64] {
        &self.greville[k]
    }

    /// Spline coefficients of physical coordinate `s`.
    pub fn control(&self, s: usize) -> &TTTensor {
        &self.control[s]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.control[0].shape()
    }

    fn spatial_vectors(&self, y: &[f64; 3], deriv: Option<usize>) -> Result<[Vec<f64>; 3]> {
        let mut out: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for k in 0..3 {
            out[k] = if deriv == Some(k) {
                self.bases[k].eval_all_deriv(y[k])?
            } else {
                self.bases[k].eval_all(y[k])?
            };
        }
        Ok(out)
    }

    fn contract(&self, s: usize, spatial: &[Vec<f64>; 3], theta: &[f64]) -> Result<f64> {
        let mut vecs: Vec<Vec<f64>> = spatial.to_vec();
        for k in 0..self.grid.dims() {
            vecs.push(self.grid.interp_vector(k, theta[k]));
        }
        let refs: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
        contract_all(&self.control[s], &refs)
    }

    /// Fitted map value. Off-node `theta` is interpolated.
    pub fn eval(&self, y: &[f64; 3], theta: &[f64]) -> Result<[f64; 3]> {
        let sp = self.spatial_vectors(y, None)?;
        let mut x = [0.0; 3];
        for s in 0..3 {
            x[s] = self.contract(s, &sp, theta)?;
        }
        Ok(x)
    }

    /// Jacobian `J[s][t] = d x_s / d y_t` of the fitted map.
    pub fn jacobian(&self, y: &[f64; 3], theta: &[f64]) -> Result<[[f64; 3]; 3]> {
        let mut j = [[0.0; 3]; 3];
        for t in 0..3 {
            let sp = self.spatial_vectors(y, Some(t))?;
            for s in 0..3 {
                j[s][t] = self.contract(s, &sp, theta)?;
            }
        }
        Ok(j)
    }
}

fn theta_at(grid: &ParamGrid, idx: &[usize]) -> Vec<f64> {
    (0..grid.dims()).map(|k| grid.nodes(k)[idx[k]]).collect()
}

/// Cross-approximates scalar samples on `points x parameter nodes`.
pub fn fit_values(
    f: &ScalarFn,
    map: &MapFn,
    points: [&[f64]; 3],
    grid: &ParamGrid,
    opts: &FitOptions,
) -> Result<TTTensor> {
    let mut shape: Vec<usize> = points.iter().map(|p| p.len()).collect();
    shape.extend(grid.levels());
    let oracle = FnOracle::new(shape, |idx: &[usize]| {
        let y = [points[0][idx[0]], points[1][idx[1]], points[2][idx[2]]];
        let theta = theta_at(grid, &idx[3..]);
        let x = map(&y, &theta);
        f(&y, &x, &theta)
    });
    let copts = CrossOptions {
        tol: opts.tol,
        max_rank: opts.max_rank,
        seed: opts.seed,
        ..CrossOptions::default()
    };
    let res = cross_interpolate(&oracle, &copts)?.require_converged()?;
    Ok(res.tensor)
}

/// Interpolation coefficients of a scalar field: values on the Greville
/// grid, then a collocation solve along each spatial mode.
pub fn fit_coefficients(
    f: &ScalarFn,
    map: &MapFn,
    bases: &[BSplineBasis; 3],
    grid: &ParamGrid,
    opts: &FitOptions,
) -> Result<TTTensor> {
    let greville: Vec<Vec<f64>> = bases.iter().map(|b| b.greville()).collect();
    let vals = fit_values(
        f,
        map,
        [&greville[0], &greville[1], &greville[2]],
        grid,
        opts,
    )?;
    let mut coef = vals;
    for k in 0..3 {
        let b = collocation_matrix(&bases[k], &greville[k])?;
        let lu = LuFactor::new(b.view())
            .map_err(|_| IgaError::Degenerate(format!("collocation matrix of mode {k} is singular")))?;
        coef = mode_solve(&coef, k, &lu)?;
    }
    Ok(coef)
}

/// Fits all three components of a geometry map and validates the result at
/// random grid points against the black box.
pub fn fit_geometry(
    map: &MapFn,
    bases: [BSplineBasis; 3],
    grid: ParamGrid,
    opts: &FitOptions,
) -> Result<GeometryMap> {
    let greville: [Vec<f64>; 3] = [bases[0].greville(), bases[1].greville(), bases[2].greville()];
    let mut control = Vec::with_capacity(3);
    for s in 0..3 {
        let component: ScalarFn = {
            let map = map.clone();
            Arc::new(move |y: &[f64; 3], _x: &[f64; 3], theta: &[f64]| map(y, theta)[s])
        };
        let sopts = FitOptions { seed: opts.seed.wrapping_add(s as u64), ..opts.clone() };
        let coef = fit_coefficients(&component, map, &bases, &grid, &sopts)?;
        control.push(coef);
    }
    let geo = GeometryMap {
        bases,
        grid,
        greville,
        control: control.try_into().expect("three components"),
    };
    validate_fit(&geo, map, opts)?;
    Ok(geo)
}

/// Compares the fitted map against the black box at random grid points.
/// Catches both a cross approximation that validated on too narrow a set
/// and a badly conditioned collocation solve.
fn validate_fit(geo: &GeometryMap, map: &MapFn, opts: &FitOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x76ee);
    let shape = geo.shape();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for _ in 0..opts.check_points.max(1) {
        let idx: Vec<usize> = shape.iter().map(|&n| rng.gen_range(0..n)).collect();
        let y = [
            geo.greville[0][idx[0]],
            geo.greville[1][idx[1]],
            geo.greville[2][idx[2]],
        ];
        let theta = theta_at(&geo.grid, &idx[3..]);
        let exact = map(&y, &theta);
        let fitted = geo.eval(&y, &theta)?;
        for s in 0..3 {
            worst = worst.max((exact[s] - fitted[s]).abs());
            scale = scale.max(exact[s].abs());
        }
    }
    if worst > 10.0 * opts.tol * scale.max(1.0) {
        return Err(IgaError::Fit(format!(
            "geometry interpolation residual {worst:.3e} exceeds {:.3e}",
            10.0 * opts.tol * scale.max(1.0)
        )));
    }
    Ok(())
}
