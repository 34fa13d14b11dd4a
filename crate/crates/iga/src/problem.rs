//! Problem description and the end-to-end solve pipeline.
//!
//! A [`BVPProblem`] bundles the geometry map, discretization bases, the
//! parameter grid, PDE coefficients and boundary conditions for
//!
//! ```text
//!   div(kappa grad u) + rho u = f   in  G(., theta)(Y),   Y = (0,1)^3,
//! ```
//!
//! with Dirichlet data on a subset of the reference faces and natural
//! (zero-flux) conditions elsewhere. [`solve_bvp`] runs the whole chain:
//! fit the geometry, build the metric factors, assemble mass/stiffness,
//! lift the boundary data and solve the joint space-parameter system with
//! the alternating solver, optionally through a quantized reshape.

use std::time::Instant;

use tt_core::{
    qtt_reshape, qtt_reshape_matrix, qtt_unreshape, QttFactorization, TTMatrix, TTTensor,
};
use tt_solve::{amen_solve, SolveOptions, SolveReport};

use splines::BSplineBasis;

use crate::assemble::{assemble_mass, assemble_stiffness};
use crate::boundary::{apply_dirichlet, FaceSet};
use crate::error::{IgaError, Result};
use crate::field::SolutionField;
use crate::geometry::{fit_coefficients, fit_geometry, fit_values, FitOptions, GeometryMap, MapFn, ScalarFn};
use crate::metric::{build_metric, Metric, MetricOptions};
use crate::param::ParamGrid;

/// Diffusion coefficient. `Constant` keeps the operator rank untouched;
/// `Field` is sampled on the quadrature grid by cross approximation;
/// `MaterialBox` is the exact rank-two tensor of a box inclusion in
/// reference coordinates whose contrast depends affinely on one parameter.
#[derive(Clone)]
pub enum KappaSpec {
    Constant(f64),
    Field(ScalarFn),
    MaterialBox {
        lo: [f64; 3],
        hi: [f64; 3],
        base: f64,
        slope: f64,
        theta_index: usize,
    },
}

impl KappaSpec {
    /// Pointwise value at reference point `y`, physical point `x`,
    /// parameter `theta`.
    pub fn eval(&self, y: &[f64; 3], x: &[f64; 3], theta: &[f64]) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Field(f) => f(y, x, theta),
            Self::MaterialBox { lo, hi, base, slope, theta_index } => {
                let inside = (0..3).all(|s| y[s] >= lo[s] && y[s] <= hi[s]);
                if inside {
                    base + slope * theta[*theta_index]
                } else {
                    1.0
                }
            }
        }
    }

    /// TT representation on `quadrature points x parameter nodes`, or
    /// `None` for a constant (callers scale the stiffness instead).
    fn on_quadrature(
        &self,
        map: &MapFn,
        metric: &Metric,
        grid: &ParamGrid,
        fit: &FitOptions,
    ) -> Result<Option<TTTensor>> {
        match self {
            Self::Constant(_) => Ok(None),
            Self::Field(f) => {
                let pts: [&[f64]; 3] =
                    [metric.quad(0).points(), metric.quad(1).points(), metric.quad(2).points()];
                Ok(Some(fit_values(f, map, pts, grid, fit)?))
            }
            Self::MaterialBox { lo, hi, base, slope, theta_index } => {
                let mut shape: Vec<usize> = (0..3).map(|k| metric.quad(k).len()).collect();
                shape.extend(grid.levels());
                let mut factors: Vec<Vec<f64>> = Vec::with_capacity(shape.len());
                for s in 0..3 {
                    let ind: Vec<f64> = metric
                        .quad(s)
                        .points()
                        .iter()
                        .map(|&q| if q >= lo[s] && q <= hi[s] { 1.0 } else { 0.0 })
                        .collect();
                    factors.push(ind);
                }
                for k in 0..grid.dims() {
                    if k == *theta_index {
                        factors.push(grid.nodes(k).iter().map(|&t| base - 1.0 + slope * t).collect());
                    } else {
                        factors.push(vec![1.0; shape[3 + k]]);
                    }
                }
                let refs: Vec<&[f64]> = factors.iter().map(|v| v.as_slice()).collect();
                let bump = TTTensor::rank_one(&refs)?;
                Ok(Some(TTTensor::ones(&shape).add(&bump)?))
            }
        }
    }
}

/// Full boundary-value problem on a parameter-dependent geometry.
#[derive(Clone)]
pub struct BVPProblem {
    pub name: String,
    pub map: MapFn,
    pub bases: [BSplineBasis; 3],
    pub grid: ParamGrid,
    /// Reaction coefficient `rho` (zero for pure diffusion).
    pub rho: f64,
    pub kappa: KappaSpec,
    /// Source term `f`; `None` means zero.
    pub source: Option<ScalarFn>,
    pub faces: FaceSet,
    /// Dirichlet data `g`; required when any face is tagged.
    pub boundary_data: Option<ScalarFn>,
    /// Known solution, when one exists, for error reporting.
    pub exact: Option<ScalarFn>,
}

impl BVPProblem {
    fn validate(&self) -> Result<()> {
        if self.faces.any() && self.boundary_data.is_none() {
            return Err(IgaError::Invalid(format!(
                "{}: Dirichlet faces without boundary data",
                self.name
            )));
        }
        if !self.faces.any() && self.boundary_data.is_some() {
            return Err(IgaError::Invalid(format!(
                "{}: boundary data given but every face is natural",
                self.name
            )));
        }
        if self.rho == 0.0 && !self.faces.any() {
            return Err(IgaError::Invalid(format!(
                "{}: pure-diffusion problem with no Dirichlet face is singular",
                self.name
            )));
        }
        Ok(())
    }
}

/// Tolerances and limits for [`solve_bvp`].
#[derive(Debug, Clone)]
pub struct SolveSettings {
    /// Target relative residual of the multilinear solve; also the final
    /// rounding tolerance of the solution.
    pub eps: f64,
    /// Rounding tolerance for assembled operators; `None` means `0.1 * eps`.
    pub op_eps: Option<f64>,
    /// Rounding tolerance inside the metric chain (Jacobians, cofactors).
    pub geom_eps: f64,
    /// Cross-approximation tolerance for geometry and coefficient fits.
    pub fit_tol: f64,
    pub fit_max_rank: usize,
    /// Solution bond rank cap in the alternating solver.
    pub max_rank: usize,
    pub kick_rank: usize,
    pub max_sweeps: usize,
    /// Solve through a quantized (prime-factor) reshape of the joint grid.
    pub qtt: bool,
    pub seed: u64,
    pub verbose: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            eps: 1e-8,
            op_eps: None,
            geom_eps: 1e-10,
            fit_tol: 1e-10,
            fit_max_rank: 80,
            max_rank: 200,
            kick_rank: 3,
            max_sweeps: 50,
            qtt: false,
            seed: 0x1d4,
            verbose: false,
        }
    }
}

impl SolveSettings {
    fn op_eps(&self) -> f64 {
        self.op_eps.unwrap_or(0.1 * self.eps)
    }
}

/// Wall-clock seconds per pipeline stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct Timings {
    pub geometry: f64,
    pub metric: f64,
    pub assembly: f64,
    pub solve: f64,
}

/// Mean and maximum bond rank of one named tensor, for reporting.
#[derive(Debug, Clone)]
pub struct RankStat {
    pub name: String,
    pub mean: f64,
    pub max: usize,
}

pub(crate) fn rank_stat(name: &str, ranks: &[usize]) -> RankStat {
    // Interior bonds only; the boundary ranks are 1 by construction.
    let interior = &ranks[1..ranks.len() - 1];
    let (mean, max) = if interior.is_empty() {
        (1.0, 1)
    } else {
        let sum: usize = interior.iter().sum();
        (sum as f64 / interior.len() as f64, *interior.iter().max().unwrap())
    };
    RankStat { name: name.into(), mean, max }
}

/// Everything [`solve_bvp`] produces. Convergence status lives in
/// `report`; callers decide whether a missed tolerance is fatal.
pub struct BVPSolution {
    pub field: SolutionField,
    pub report: SolveReport,
    pub timings: Timings,
    pub ranks: Vec<RankStat>,
    pub geometry: GeometryMap,
    pub metric: Metric,
    pub operator: TTMatrix,
    pub rhs: TTTensor,
}

pub fn solve_bvp(problem: &BVPProblem, settings: &SolveSettings) -> Result<BVPSolution> {
    problem.validate()?;
    let mut timings = Timings::default();
    let fit = FitOptions {
        tol: settings.fit_tol,
        max_rank: settings.fit_max_rank,
        seed: settings.seed,
        ..FitOptions::default()
    };

    let t = Instant::now();
    let geo = fit_geometry(&problem.map, problem.bases.clone(), problem.grid.clone(), &fit)?;
    timings.geometry = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mopts = MetricOptions {
        eps: settings.geom_eps,
        recip_eps: settings.eps.min(1e-8),
        recip_max_rank: settings.max_rank,
        seed: settings.seed ^ 0xde7,
        ..MetricOptions::default()
    };
    let metric = build_metric(&geo, &mopts)?;
    timings.metric = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let op_eps = settings.op_eps();
    let kappa_tt = problem.kappa.on_quadrature(&problem.map, &metric, &problem.grid, &fit)?;
    let mut stiffness =
        assemble_stiffness(&metric, kappa_tt.as_ref(), settings.geom_eps, op_eps)?;
    if let KappaSpec::Constant(c) = problem.kappa {
        if c != 1.0 {
            stiffness = stiffness.scale(c);
        }
    }

    let needs_mass = problem.rho != 0.0 || problem.source.is_some();
    let mass = if needs_mass { Some(assemble_mass(&metric, op_eps)?) } else { None };

    // Weak form of div(kappa grad u) + rho u = f reads
    // (rho M - S) u = M fhat; we solve the negated system
    // (S - rho M) u = -M fhat so that pure diffusion gives a positive
    // definite operator after the Dirichlet restriction.
    let operator = match (&mass, problem.rho) {
        (Some(m), rho) if rho != 0.0 => stiffness.sub(&m.scale(rho))?.round(op_eps),
        _ => stiffness,
    };

    let shape = operator.row_shape();
    let rhs = match (&problem.source, &mass) {
        (Some(f), Some(m)) => {
            let fhat = fit_coefficients(f, &problem.map, &problem.bases, &problem.grid, &fit)?;
            m.apply_rounded(&fhat, op_eps)?.scale(-1.0)
        }
        _ => TTTensor::zeros(&shape),
    };

    let ghat = match &problem.boundary_data {
        Some(g) => Some(fit_coefficients(g, &problem.map, &problem.bases, &problem.grid, &fit)?),
        None => None,
    };
    let system = apply_dirichlet(&operator, &rhs, ghat.as_ref(), &problem.faces, op_eps)?;
    timings.assembly = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let sopts = SolveOptions {
        eps: settings.eps,
        max_sweeps: settings.max_sweeps,
        max_rank: settings.max_rank,
        kick_rank: settings.kick_rank,
        verbose: settings.verbose,
        ..SolveOptions::default()
    };
    let (x, report) = if settings.qtt {
        let fact = QttFactorization::maximal(&shape);
        let qop = qtt_reshape_matrix(&system.op, &fact, 0.01 * op_eps)?;
        let qrhs = qtt_reshape(&system.rhs, &fact, 0.01 * op_eps)?;
        let (qx, report) = amen_solve(&qop, &qrhs, &sopts, None)?;
        (qtt_unreshape(&qx, &fact)?, report)
    } else {
        amen_solve(&system.op, &system.rhs, &sopts, None)?
    };
    let coeffs = x.add(&system.lift)?.round(settings.eps);
    timings.solve = t.elapsed().as_secs_f64();

    let ranks = vec![
        rank_stat("geometry", &geo.control(0).ranks()),
        rank_stat("det", &metric.omega().ranks()),
        rank_stat("det_inv", &metric.omega_inv().ranks()),
        rank_stat("operator", &system.op.ranks()),
        rank_stat("rhs", &system.rhs.ranks()),
        rank_stat("solution", &coeffs.ranks()),
    ];

    let field = SolutionField::new(problem.bases.clone(), problem.grid.clone(), coeffs)?;
    Ok(BVPSolution {
        field,
        report,
        timings,
        ranks,
        geometry: geo,
        metric,
        operator: system.op,
        rhs: system.rhs,
    })
}
