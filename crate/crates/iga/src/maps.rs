//! Built-in geometry maps.
//!
//! Each constructor returns a black-box map over the reference cube and a
//! case-specific parameter box; the parameter counts and ranges live with
//! the problem definitions in [`crate::cases`].

use std::sync::Arc;

use splines::BSplineBasis;

use crate::geometry::MapFn;

/// `G(y, theta) = y`. Any parameters are ignored.
pub fn identity_map() -> MapFn {
    Arc::new(|y: &[f64; 3], _: &[f64]| *y)
}

/// `G(y, theta) = A y + b`, parameters ignored.
pub fn affine_map(a: [[f64; 3]; 3], b: [f64; 3]) -> MapFn {
    Arc::new(move |y: &[f64; 3], _: &[f64]| {
        let mut x = b;
        for s in 0..3 {
            for t in 0..3 {
                x[s] += a[s][t] * y[t];
            }
        }
        x
    })
}

/// Cylinder of radius 1 over `x_3 in [-1, 1]` whose midsection bulges with
/// a single parameter `theta in [0, 1]`: the radial scaling is
/// `(1 + cos((2 y_3 - 1) pi)) / 2 * theta + 1`, so the caps stay put and
/// the waist dilates by up to a factor of two.
pub fn bulged_cylinder_map() -> MapFn {
    Arc::new(|y: &[f64; 3], theta: &[f64]| {
        let u = 2.0 * y[0] - 1.0;
        let v = 2.0 * y[1] - 1.0;
        let c = 0.5 * (1.0 + ((2.0 * y[2] - 1.0) * std::f64::consts::PI).cos()) * theta[0] + 1.0;
        [
            u * (1.0 - v * v / 2.0).sqrt() * c,
            v * (1.0 - u * u / 2.0).sqrt() * c,
            2.0 * y[2] - 1.0,
        ]
    })
}

/// Quarter of a C-shaped ring: inner radius 1.5, outer radius
/// `2 + sum_k theta_k b_k(y_2)` with a B-spline bump basis of size `np`
/// over the normalized angle, extruded along `x_3`. The angle spans
/// `[0, pi/4]`.
pub fn ring_segment_map(np: usize) -> MapFn {
    let degree = 2.min(np.saturating_sub(1));
    let basis = BSplineBasis::open_uniform(np, degree).expect("small basis");
    Arc::new(move |y: &[f64; 3], theta: &[f64]| {
        let bumps = basis.eval_all(y[1]).expect("in domain");
        let r_out: f64 = 2.0 + theta.iter().zip(&bumps).map(|(t, b)| t * b).sum::<f64>();
        let r = 1.5 + y[0] * r_out;
        let phi = y[1] * std::f64::consts::FRAC_PI_4;
        [r * phi.cos(), r * phi.sin(), y[2]]
    })
}

/// Filled cylinder of radius 1 and height 1 containing a half-disc slab of
/// a second material. The slab image is fixed in reference coordinates
/// (`y_1 < 1/2`, `0.3 < y_3 < 0.7`); the four parameters tilt and shift its
/// physical faces: the slab occupies
/// `x_1 < 0`, `0.3 + theta_4 < x_3 < 0.7 + theta_3 + theta_2 x_1`
/// (`theta_1` only scales the material coefficient). The height map is
/// piecewise linear in `y_3` with breaks at 0.3 and 0.7, so bases for this
/// map need those knots at full multiplicity.
pub fn slab_cylinder_map() -> MapFn {
    Arc::new(|y: &[f64; 3], theta: &[f64]| {
        let u = 2.0 * y[0] - 1.0;
        let v = 2.0 * y[1] - 1.0;
        let x1 = u * (1.0 - v * v / 2.0).sqrt();
        let x2 = v * (1.0 - u * u / 2.0).sqrt();
        let bot = 0.3 + theta[3];
        let top = 0.7 + theta[2] + theta[1] * x1;
        let x3 = if y[2] <= 0.3 {
            y[2] / 0.3 * bot
        } else if y[2] <= 0.7 {
            bot + (y[2] - 0.3) / 0.4 * (top - bot)
        } else {
            top + (y[2] - 0.7) / 0.3 * (1.0 - top)
        };
        [x1, x2, x3]
    })
}

/// Straight rectangular waveguide `[-1/2, 1/2] x [0, 1] x [-3, 3]` whose
/// axis bends sideways and stretches with three parameters. All the
/// deformations vanish at both ends, so the inlet `x_3 = -3` and the
/// outlet `x_3 = 3` coincide with the reference faces `y_3 = 0` and
/// `y_3 = 1` for every parameter value.
pub fn waveguide_map() -> MapFn {
    Arc::new(|y: &[f64; 3], theta: &[f64]| {
        let s = (std::f64::consts::PI * y[2]).sin().powi(2);
        [
            (y[0] - 0.5) + 0.5 * theta[0] * s,
            y[1] + 0.5 * theta[1] * s,
            6.0 * y[2] - 3.0 + theta[2] * s,
        ]
    })
}
