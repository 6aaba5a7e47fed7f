use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{AxisDescriptor, LabeledPoint, PointCloud};
use crate::linalg::{dot, norm};

/// Affine equalities `matrix x = offsets` on extensive coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoplethConstraint {
    pub matrix: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub tolerance: f64,
}

impl IsoplethConstraint {
    pub fn new(matrix: Vec<Vec<f64>>, offsets: Vec<f64>, tolerance: f64) -> Self {
        IsoplethConstraint {
            matrix,
            offsets,
            tolerance,
        }
    }

    pub fn identity(tolerance: f64) -> Self {
        IsoplethConstraint::new(Vec::new(), Vec::new(), tolerance)
    }
}

const RANK_TOLERANCE: f64 = 1e-10;

/// Points satisfying the constraint, re-expressed in orthonormal coordinates
/// of the constraint's solution subspace.
pub fn slice_isopleth(cloud: &PointCloud, constraint: &IsoplethConstraint) -> Result<PointCloud> {
    let w = cloud.work_dims();
    let m = constraint.matrix.len();
    if m == 0 {
        return Ok(cloud.clone());
    }
    if constraint.offsets.len() != m || constraint.matrix.iter().any(|r| r.len() != w) {
        return Err(Error::InconsistentConstraint(format!(
            "expected {m} offsets and rows of length {w}"
        )));
    }
    if !(constraint.tolerance > 0.0) {
        return Err(Error::InvalidArgument(
            "isopleth tolerance must be positive".into(),
        ));
    }
    if m > w {
        return Err(Error::InconsistentConstraint(format!(
            "{m} constraints on {w} coordinates"
        )));
    }
    // Pad to square so the SVD yields a full right basis.
    let a = DMatrix::from_fn(
        w,
        w,
        |i, j| if i < m { constraint.matrix[i][j] } else { 0.0 },
    );
    let svd = a.svd(true, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOLERANCE * smax)
        .count();
    if rank < m {
        return Err(Error::InconsistentConstraint(
            "constraint rows are linearly dependent".into(),
        ));
    }
    let mut null: Vec<Vec<f64>> = (0..w)
        .filter(|&i| svd.singular_values[i] <= RANK_TOLERANCE * smax)
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect();
    for v in &mut null {
        let lead = v.iter().copied().fold(
            0.0,
            |acc: f64, c| if c.abs() > acc.abs() + 1e-12 { c } else { acc },
        );
        if lead < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
    let am = DMatrix::from_fn(m, w, |i, j| constraint.matrix[i][j]);
    let b = DVector::from_column_slice(&constraint.offsets);
    let base = am
        .clone()
        .svd(true, true)
        .solve(&b, RANK_TOLERANCE * smax)
        .map_err(|e| Error::InconsistentConstraint(e.to_string()))?;
    let base: Vec<f64> = base.iter().copied().collect();

    let points: Vec<LabeledPoint> = cloud
        .points
        .iter()
        .filter(|p| {
            constraint
                .matrix
                .iter()
                .zip(&constraint.offsets)
                .all(|(row, &off)| {
                    let scale = norm(row) * p.x.iter().map(|v| v.abs()).fold(1.0, f64::max);
                    (dot(row, &p.x) - off).abs() <= constraint.tolerance * scale
                })
        })
        .map(|p| {
            let rel: Vec<f64> = p.x.iter().zip(&base).map(|(a, b)| a - b).collect();
            LabeledPoint {
                index: p.index,
                phase: p.phase.clone(),
                x: null.iter().map(|v| dot(v, &rel)).collect(),
                energy: p.energy,
            }
        })
        .collect();
    let reduced = w - m;
    if points.len() < reduced + 1 {
        return Err(Error::EmptySlice {
            found: points.len(),
            needed: reduced + 1,
        });
    }
    let variables = (0..reduced)
        .map(|k| AxisDescriptor::extensive(format!("t{}", k + 1)))
        .collect();
    PointCloud::new(variables, points)
}
