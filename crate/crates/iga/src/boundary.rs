//! Dirichlet conditions by lifting.
//!
//! Clamped bases interpolate at the patch faces: the trace of a spline on
//! the face `y_s = 0` (or 1) is carried entirely by the coefficient slab
//! with index 0 (or `n_s - 1`) in mode `s`. Dirichlet data therefore enters
//! as a lift tensor that keeps the boundary slabs of the data interpolant
//! and is zero inside; the system is restricted to interior coefficients by
//! a rank-one diagonal projector and closed with the identity on the
//! boundary slabs.

use tt_core::{TTMatrix, TTTensor};

use crate::error::{IgaError, Result};

/// Which of the six reference faces carry Dirichlet conditions.
/// `dirichlet[s][0]` tags `y_s = 0`, `dirichlet[s][1]` tags `y_s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FaceSet {
    pub dirichlet: [[bool; 2]; 3],
}

impl FaceSet {
    pub fn all_dirichlet() -> Self {
        Self { dirichlet: [[true; 2]; 3] }
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Marks one face Dirichlet; `side` is 0 for `y_s = 0`, 1 for `y_s = 1`.
    pub fn with(mut self, mode: usize, side: usize) -> Self {
        self.dirichlet[mode][side] = true;
        self
    }

    pub fn any(&self) -> bool {
        self.dirichlet.iter().flatten().any(|&d| d)
    }

    /// 0/1 interior masks per spatial mode: zero exactly on the Dirichlet
    /// boundary coefficient slabs.
    pub fn masks(&self, sizes: [usize; 3]) -> [Vec<f64>; 3] {
        let mut out: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for s in 0..3 {
            let mut m = vec![1.0; sizes[s]];
            if self.dirichlet[s][0] {
                m[0] = 0.0;
            }
            if self.dirichlet[s][1] {
                m[sizes[s] - 1] = 0.0;
            }
            out[s] = m;
        }
        out
    }
}

/// The restricted system together with the lift it was shifted by. The
/// final solution is `solve(op, rhs) + lift`.
pub struct LiftedSystem {
    pub op: TTMatrix,
    pub rhs: TTTensor,
    pub lift: TTTensor,
}

/// Restricts `op x = rhs` to the interior coefficients, shifting by the
/// boundary interpolant `ghat` (when given) on the Dirichlet slabs.
pub fn apply_dirichlet(
    op: &TTMatrix,
    rhs: &TTTensor,
    ghat: Option<&TTTensor>,
    faces: &FaceSet,
    eps: f64,
) -> Result<LiftedSystem> {
    let shape = rhs.shape();
    if shape.len() < 3 {
        return Err(IgaError::Invalid("expected three spatial modes".into()));
    }
    let sizes = [shape[0], shape[1], shape[2]];
    let masks = faces.masks(sizes);
    let mode_masks: Vec<Option<&[f64]>> = (0..shape.len())
        .map(|k| if k < 3 { Some(masks[k].as_slice()) } else { None })
        .collect();

    let lift = match ghat {
        Some(g) if faces.any() => {
            let interior = g.scale_modes(&mode_masks)?;
            g.sub(&interior)?.round(eps)
        }
        _ => TTTensor::zeros(&shape),
    };

    let shifted = if lift.norm() > 0.0 {
        rhs.sub(&op.apply_rounded(&lift, eps)?)?
    } else {
        rhs.clone()
    };
    let restricted_rhs = shifted.scale_modes(&mode_masks)?.round(eps);

    // P op P + (I - P): interior equations plus the identity on the
    // Dirichlet slabs, which pins the homogeneous part to zero there.
    let projected = op.scale_modes(&mode_masks, &mode_masks)?;
    let mask_factors: Vec<Vec<f64>> = (0..shape.len())
        .map(|k| {
            if k < 3 {
                masks[k].clone()
            } else {
                vec![1.0; shape[k]]
            }
        })
        .collect();
    let refs: Vec<&[f64]> = mask_factors.iter().map(|v| v.as_slice()).collect();
    let sel = TTTensor::rank_one(&refs)?;
    let complement = TTTensor::ones(&shape).sub(&sel)?.round(1e-15);
    let restricted_op = projected.add(&TTMatrix::diag(&complement))?.round(eps);

    Ok(LiftedSystem { op: restricted_op, rhs: restricted_rhs, lift })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_zero_only_tagged_slabs() {
        let faces = FaceSet::none().with(0, 1).with(2, 0);
        let m = faces.masks([4, 3, 5]);
        assert_eq!(m[0], vec![1.0, 1.0, 1.0, 0.0]);
        assert_eq!(m[1], vec![1.0, 1.0, 1.0]);
        assert_eq!(m[2], vec![0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn identity_system_with_zero_data_stays_identity_inside() {
        let shape = [3usize, 3, 3, 2];
        let op = TTMatrix::identity(&shape);
        let rhs = TTTensor::ones(&shape);
        let faces = FaceSet::all_dirichlet();
        let sys = apply_dirichlet(&op, &rhs, None, &faces, 1e-12).unwrap();
        // Interior index (1,1,1): rhs survives; boundary rhs is zeroed.
        assert!((sys.rhs.entry(&[1, 1, 1, 0]) - 1.0).abs() < 1e-12);
        assert!(sys.rhs.entry(&[0, 1, 1, 0]).abs() < 1e-12);
        // Operator is the identity everywhere (P I P + I - P = I).
        let full = sys.op.full_matrix().unwrap();
        for i in 0..full.nrows() {
            for j in 0..full.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((full[(i, j)] - want).abs() < 1e-10);
            }
        }
    }
}
