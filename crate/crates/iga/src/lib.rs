//! Isogeometric discretization of parameter-dependent elliptic problems in
//! tensor-train form.
//!
//! The pipeline: fit a geometry map's control points over a joint
//! `space x parameter` grid ([`geometry`]), form Jacobian, determinant and
//! inverse-metric factors as TT tensors ([`metric`]), assemble mass and
//! stiffness operators as TT matrices ([`assemble`]), impose Dirichlet
//! data by lifting ([`boundary`]), and solve one multilinear system whose
//! solution holds the discrete field for every parameter value at once
//! ([`problem`]). [`reference`] builds the same discrete systems densely
//! at a fixed parameter value, as an independent check.

pub mod assemble;
pub mod boundary;
pub mod cases;
mod error;
pub mod field;
pub mod geometry;
pub mod maps;
pub mod metric;
pub mod modes;
pub mod param;
pub mod problem;
pub mod reference;

pub use boundary::{apply_dirichlet, FaceSet, LiftedSystem};
pub use error::{IgaError, Result};
pub use field::{error_vs_exact, ErrorNorms, SolutionField};
pub use geometry::{
    fit_coefficients, fit_geometry, fit_values, FitOptions, GeometryMap, MapFn, ScalarFn,
};
pub use metric::{build_metric, hadamard_rounded, Metric, MetricOptions};
pub use modes::{bilinear_form, contract_all, contract_trailing, mode_apply, mode_solve};
pub use param::ParamGrid;
pub use problem::{
    solve_bvp, BVPProblem, BVPSolution, KappaSpec, RankStat, SolveSettings, Timings,
};
pub use reference::{reference_matrices, reference_solve, Csr, ThetaReference};
