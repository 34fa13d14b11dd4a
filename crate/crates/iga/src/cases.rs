//! Built-in boundary-value problems on the four benchmark geometries.
//!
//! Each constructor fixes the geometry map, parameter box, boundary
//! conditions and coefficients; discretization sizes stay caller-chosen.
//! [`by_name`] dispatches on the case name for the command line.

use std::sync::Arc;

use splines::{BSplineBasis, KnotVector};

use crate::boundary::FaceSet;
use crate::error::{IgaError, Result};
use crate::geometry::ScalarFn;
use crate::maps::{bulged_cylinder_map, ring_segment_map, slab_cylinder_map, waveguide_map};
use crate::param::ParamGrid;
use crate::problem::{BVPProblem, KappaSpec};

pub const CASE_NAMES: [&str; 4] =
    ["bulged-cylinder", "ring-segment", "slab-cylinder", "waveguide"];

/// Open knot vector of basis size `n`, degree `p`, with each value in
/// `interfaces` inserted at multiplicity `p` (a C0 line). The remaining
/// distinct knots are spread over the segments between interfaces
/// proportionally to segment length, uniformly within each segment.
pub fn knots_with_interfaces(n: usize, p: usize, interfaces: &[f64]) -> Result<KnotVector> {
    for w in interfaces.windows(2) {
        if w[0] >= w[1] {
            return Err(IgaError::Invalid("interfaces must be strictly increasing".into()));
        }
    }
    if interfaces.iter().any(|&x| x <= 0.0 || x >= 1.0) {
        return Err(IgaError::Invalid("interfaces must lie strictly inside (0, 1)".into()));
    }
    let slots = n
        .checked_sub(p + 1)
        .ok_or_else(|| IgaError::Invalid("basis smaller than degree + 1".into()))?;
    let rest = slots
        .checked_sub(p * interfaces.len())
        .ok_or_else(|| IgaError::Invalid(format!(
            "{n} basis functions cannot host {} interfaces at degree {p}",
            interfaces.len()
        )))?;

    let mut edges = vec![0.0];
    edges.extend_from_slice(interfaces);
    edges.push(1.0);
    let lengths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();

    // Largest-remainder split of the leftover knots across segments.
    let quotas: Vec<f64> = lengths.iter().map(|&l| l * rest as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|&q| q.floor() as usize).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut oi = 0;
    while assigned < rest {
        let seg = order[oi % order.len()];
        counts[seg] += 1;
        assigned += 1;
        oi += 1;
    }

    let mut knots = vec![0.0; p + 1];
    for (seg, &count) in counts.iter().enumerate() {
        let (a, b) = (edges[seg], edges[seg + 1]);
        for i in 1..=count {
            knots.push(a + (b - a) * i as f64 / (count + 1) as f64);
        }
        if seg + 1 < edges.len() - 1 {
            for _ in 0..p {
                knots.push(edges[seg + 1]);
            }
        }
    }
    knots.extend(std::iter::repeat(1.0).take(p + 1));
    Ok(KnotVector::from_knots(knots, p)?)
}

fn uniform_bases(n: [usize; 3], p: usize) -> Result<[BSplineBasis; 3]> {
    Ok([
        BSplineBasis::open_uniform(n[0], p)?,
        BSplineBasis::open_uniform(n[1], p)?,
        BSplineBasis::open_uniform(n[2], p)?,
    ])
}

fn check_levels(name: &str, levels: &[usize], want: usize) -> Result<Vec<usize>> {
    if levels.len() == want {
        Ok(levels.to_vec())
    } else if levels.len() == 1 {
        Ok(vec![levels[0]; want])
    } else {
        Err(IgaError::Invalid(format!(
            "{name} takes {want} parameter levels, got {}",
            levels.len()
        )))
    }
}

/// Laplace problem on a cylinder whose waist bulges with one parameter.
/// The exact solution `sin(2 x_1) sin(3 x_2) exp(-sqrt(13) x_3)` is
/// harmonic and supplies the Dirichlet data on all faces.
pub fn bulged_cylinder(n: [usize; 3], p: usize, levels: &[usize]) -> Result<BVPProblem> {
    let levels = check_levels("bulged-cylinder", levels, 1)?;
    let exact: ScalarFn = Arc::new(|_y: &[f64; 3], x: &[f64; 3], _t: &[f64]| {
        (2.0 * x[0]).sin() * (3.0 * x[1]).sin() * (-(13.0f64.sqrt()) * x[2]).exp()
    });
    Ok(BVPProblem {
        name: "bulged-cylinder".into(),
        map: bulged_cylinder_map(),
        bases: uniform_bases(n, p)?,
        grid: ParamGrid::new(&[(0.0, 1.0)], &levels)?,
        rho: 0.0,
        kappa: KappaSpec::Constant(1.0),
        source: None,
        faces: FaceSet::all_dirichlet(),
        boundary_data: Some(exact.clone()),
        exact: Some(exact),
    })
}

/// Steady diffusion across a quarter ring whose outer radius is perturbed
/// by `np` spline bumps: `u = 0` on the inner arc, `u = 1` on the outer
/// arc, natural conditions on the cut faces and the extrusion caps.
pub fn ring_segment(n: [usize; 3], p: usize, levels: &[usize], np: usize) -> Result<BVPProblem> {
    if np == 0 {
        return Err(IgaError::Invalid("ring-segment needs at least one bump".into()));
    }
    let levels = check_levels("ring-segment", levels, np)?;
    let intervals = vec![(-0.05, 0.05); np];
    Ok(BVPProblem {
        name: "ring-segment".into(),
        map: ring_segment_map(np),
        bases: uniform_bases(n, p)?,
        grid: ParamGrid::new(&intervals, &levels)?,
        rho: 0.0,
        kappa: KappaSpec::Constant(1.0),
        source: None,
        faces: FaceSet::none().with(0, 0).with(0, 1),
        boundary_data: Some(Arc::new(|y: &[f64; 3], _x: &[f64; 3], _t: &[f64]| y[0])),
        exact: None,
    })
}

/// Cylinder with a half-disc inclusion of contrast `5 + 0.5 theta_1`;
/// `theta_2, theta_3` tilt and shift the slab top, `theta_4` shifts its
/// bottom. Fixed temperatures on the end caps drive a vertical flux.
pub fn slab_cylinder(n: [usize; 3], p: usize, levels: &[usize]) -> Result<BVPProblem> {
    let levels = check_levels("slab-cylinder", levels, 4)?;
    let intervals = [(-1.0, 1.0), (-0.05, 0.05), (-0.05, 0.05), (-0.05, 0.05)];
    let bases = [
        BSplineBasis::new(knots_with_interfaces(n[0], p, &[0.5])?),
        BSplineBasis::open_uniform(n[1], p)?,
        BSplineBasis::new(knots_with_interfaces(n[2], p, &[0.3, 0.7])?),
    ];
    Ok(BVPProblem {
        name: "slab-cylinder".into(),
        map: slab_cylinder_map(),
        bases,
        grid: ParamGrid::new(&intervals, &levels)?,
        rho: 0.0,
        kappa: KappaSpec::MaterialBox {
            lo: [0.0, 0.0, 0.3],
            hi: [0.5, 1.0, 0.7],
            base: 5.0,
            slope: 0.5,
            theta_index: 0,
        },
        source: None,
        faces: FaceSet::none().with(2, 0).with(2, 1),
        boundary_data: Some(Arc::new(|_y: &[f64; 3], x: &[f64; 3], _t: &[f64]| {
            10.0 * (1.0 - x[2])
        })),
        exact: None,
    })
}

/// Helmholtz transmission through a bending, stretching waveguide at
/// `rho = 49`: a transverse mode enters at `x_3 = -3`, the walls and the
/// outlet are sound-soft.
pub fn waveguide(n: [usize; 3], p: usize, levels: &[usize]) -> Result<BVPProblem> {
    let levels = check_levels("waveguide", levels, 3)?;
    let intervals = [(-0.2, 0.2), (-0.2, 0.2), (-0.3, 0.3)];
    Ok(BVPProblem {
        name: "waveguide".into(),
        map: waveguide_map(),
        bases: uniform_bases(n, p)?,
        grid: ParamGrid::new(&intervals, &levels)?,
        rho: 49.0,
        kappa: KappaSpec::Constant(1.0),
        source: None,
        faces: FaceSet::all_dirichlet(),
        boundary_data: Some(Arc::new(|y: &[f64; 3], _x: &[f64; 3], _t: &[f64]| {
            let pi = std::f64::consts::PI;
            (pi * y[0]).sin() * (pi * y[1]).sin() * (1.0 - y[2])
        })),
        exact: None,
    })
}

/// Dispatch by case name; `levels` may be a single broadcast value.
/// `np` is only read by `ring-segment`.
pub fn by_name(
    name: &str,
    n: [usize; 3],
    p: usize,
    levels: &[usize],
    np: usize,
) -> Result<BVPProblem> {
    match name {
        "bulged-cylinder" => bulged_cylinder(n, p, levels),
        "ring-segment" => ring_segment(n, p, levels, np),
        "slab-cylinder" => slab_cylinder(n, p, levels),
        "waveguide" => waveguide(n, p, levels),
        other => Err(IgaError::Invalid(format!(
            "unknown case '{other}'; expected one of {CASE_NAMES:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interface_knots_hit_the_interfaces_at_multiplicity_p() {
        let kv = knots_with_interfaces(24, 2, &[0.3, 0.7]).unwrap();
        assert_eq!(kv.basis_len(), 24);
        let hits = |v: f64| kv.knots().iter().filter(|&&k| (k - v).abs() < 1e-14).count();
        assert_eq!(hits(0.3), 2);
        assert_eq!(hits(0.7), 2);
        // Remaining distinct knots land uniformly: 0.3 and 0.7 sit on the
        // grid implied by 5/7/5 interior knots per segment.
        let breaks = kv.breakpoints();
        assert!(breaks.windows(2).all(|w| w[1] - w[0] > 0.04));
    }

    #[test]
    fn interface_knots_reject_overfull_requests() {
        assert!(knots_with_interfaces(6, 3, &[0.3, 0.7]).is_err());
        assert!(knots_with_interfaces(8, 2, &[0.7, 0.3]).is_err());
        assert!(knots_with_interfaces(8, 2, &[1.0]).is_err());
    }

    #[test]
    fn constructors_validate_level_counts() {
        assert!(bulged_cylinder([8, 8, 8], 2, &[3]).is_ok());
        assert!(bulged_cylinder([8, 8, 8], 2, &[3, 3]).is_err());
        assert!(ring_segment([8, 8, 8], 2, &[3], 5).is_ok());
        assert!(ring_segment([8, 8, 8], 2, &[3, 3], 5).is_err());
        assert!(slab_cylinder([12, 12, 12], 2, &[4]).is_ok());
        assert!(waveguide([8, 8, 16], 2, &[4, 4, 4]).is_ok());
        assert!(by_name("no-such-case", [8, 8, 8], 2, &[3], 1).is_err());
    }

    #[test]
    fn slab_cylinder_bases_resolve_the_material_interfaces() {
        let prob = slab_cylinder([24, 24, 24], 2, &[4]).unwrap();
        let has_break = |basis: &BSplineBasis, v: f64| {
            basis.breakpoints().iter().any(|&b| (b - v).abs() < 1e-14)
        };
        assert!(has_break(&prob.bases[0], 0.5));
        assert!(has_break(&prob.bases[2], 0.3));
        assert!(has_break(&prob.bases[2], 0.7));
    }
}
