use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, solve_full_rank};

/// Plane `U = gradient . x + offset` over extensive space. The gradient is
/// the raw conjugate vector `dU/dX`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub gradient: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        dot(&self.gradient, x) + self.offset
    }
}

const SINGULAR_REL: f64 = 1e-12;

/// Plane through `W + 1` lifted vertices given as extensive coordinates and
/// energies.
pub fn facet_hyperplane<P: AsRef<[f64]>>(xs: &[P], energies: &[f64]) -> Result<Hyperplane> {
    if xs.is_empty() || xs.len() != energies.len() {
        return Err(Error::InvalidArgument(
            "facet_hyperplane needs matching vertices and energies".into(),
        ));
    }
    let w = xs[0].as_ref().len();
    if xs.len() != w + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} vertices, got {}",
            w + 1,
            xs.len()
        )));
    }
    if w == 0 {
        return Ok(Hyperplane {
            gradient: Vec::new(),
            offset: energies[0],
        });
    }
    let x0 = xs[0].as_ref();
    let a = DMatrix::from_fn(w, w, |i, j| xs[i + 1].as_ref()[j] - x0[j]);
    let b = DVector::from_fn(w, |i, _| energies[i + 1] - energies[0]);
    let scale: f64 = (0..w).map(|i| a.row(i).norm()).product();
    let lu = a.clone().lu();
    let det = lu.determinant();
    if scale == 0.0 || det.abs() <= SINGULAR_REL * scale {
        return Err(Error::SingularSimplex);
    }
    let mut g = lu.solve(&b).ok_or(Error::SingularSimplex)?;
    // one step of iterative refinement
    let r = &b - &a * &g;
    if let Some(dg) = lu.solve(&r) {
        g += dg;
    }
    let gradient: Vec<f64> = g.iter().copied().collect();
    let offset = xs
        .iter()
        .zip(energies)
        .map(|(x, e)| e - dot(&gradient, x.as_ref()))
        .sum::<f64>()
        / xs.len() as f64;
    Ok(Hyperplane { gradient, offset })
}

/// Affine weights of `target` with respect to `k + 1` simplex vertices.
///
/// The weights sum to one and reconstruct `target`; a target farther than
/// `tolerance` (relative to the simplex size) from the affine span is rejected.
pub fn barycentric_coordinates<P: AsRef<[f64]>>(
    vertices: &[P],
    target: &[f64],
    tolerance: f64,
) -> Result<Vec<f64>> {
    let Some(first) = vertices.first() else {
        return Err(Error::InvalidArgument("empty simplex".into()));
    };
    let v0 = first.as_ref();
    let w = v0.len();
    if target.len() != w || vertices.iter().any(|v| v.as_ref().len() != w) {
        return Err(Error::InvalidArgument(
            "dimension mismatch in barycentric_coordinates".into(),
        ));
    }
    let k = vertices.len() - 1;
    let rhs: Vec<f64> = target.iter().zip(v0).map(|(t, o)| t - o).collect();
    if k == 0 {
        let residual = norm(&rhs);
        if residual > tolerance * norm(v0).max(1.0) {
            return Err(Error::OutsideAffineSpan { residual });
        }
        return Ok(vec![1.0]);
    }
    if k > w {
        return Err(Error::SingularSimplex);
    }
    let a = DMatrix::from_fn(w, k, |i, j| vertices[j + 1].as_ref()[i] - v0[i]);
    let b = DVector::from_vec(rhs);
    let mut lambda = if k == w {
        let lu = a.clone().lu();
        let scale: f64 = (0..k).map(|j| a.column(j).norm()).product();
        if scale == 0.0 || lu.determinant().abs() <= SINGULAR_REL * scale {
            return Err(Error::SingularSimplex);
        }
        let mut l = lu.solve(&b).ok_or(Error::SingularSimplex)?;
        let r = &b - &a * &l;
        if let Some(dl) = lu.solve(&r) {
            l += dl;
        }
        l
    } else {
        solve_full_rank(&a, &b, SINGULAR_REL).ok_or(Error::SingularSimplex)?
    };
    if k < w {
        let r = &b - &a * &lambda;
        if let Some(dl) = solve_full_rank(&a, &r, SINGULAR_REL) {
            lambda += dl;
        }
    }
    let residual = (&a * &lambda - &b).norm();
    let size = (0..k).map(|j| a.column(j).norm()).fold(0.0, f64::max);
    if residual > tolerance * size.max(f64::MIN_POSITIVE) {
        return Err(Error::OutsideAffineSpan { residual });
    }
    let mut weights = Vec::with_capacity(k + 1);
    weights.push(1.0 - lambda.iter().sum::<f64>());
    weights.extend(lambda.iter().copied());
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_segment_has_zero_gradient() {
        let h = facet_hyperplane(&[vec![0.0], vec![2.0]], &[0.0, 0.0]).unwrap();
        assert_eq!(h.gradient, vec![0.0]);
        assert_eq!(h.offset, 0.0);
    }

    #[test]
    fn triangle_gradient_by_interpolation() {
        let h = facet_hyperplane(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            &[0.0, 2.0, 4.0],
        )
        .unwrap();
        assert!((h.gradient[0] - 2.0).abs() < 1e-15);
        assert!((h.gradient[1] - 4.0).abs() < 1e-15);
        assert!(h.offset.abs() < 1e-15);
    }

    #[test]
    fn collinear_triangle_is_singular() {
        let err = facet_hyperplane(
            &[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]],
            &[0.0, 1.0, 2.0],
        );
        assert!(matches!(err, Err(Error::SingularSimplex)));
    }

    #[test]
    fn segment_midpoint_and_vertex() {
        let seg = [vec![0.0], vec![2.0]];
        assert_eq!(
            barycentric_coordinates(&seg, &[1.0], 1e-9).unwrap(),
            vec![0.5, 0.5]
        );
        assert_eq!(
            barycentric_coordinates(&seg, &[0.0], 1e-9).unwrap(),
            vec![1.0, 0.0]
        );
        assert_eq!(
            barycentric_coordinates(&seg, &[2.0], 1e-9).unwrap(),
            vec![0.0, 1.0]
        );
    }

    #[test]
    fn asymmetric_tie_line_weights() {
        // (19/6 - 1) / 3 = 13/18 on the left endpoint
        let w =
            barycentric_coordinates(&[vec![1.0 / 6.0], vec![19.0 / 6.0]], &[1.0], 1e-9).unwrap();
        assert!((w[0] - 13.0 / 18.0).abs() < 1e-15);
        assert!((w[1] - 5.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn off_span_target_is_rejected() {
        let seg = [vec![0.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(
            barycentric_coordinates(&seg, &[0.5, 0.1], 1e-9),
            Err(Error::OutsideAffineSpan { .. })
        ));
        let degenerate = [vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(matches!(
            barycentric_coordinates(&degenerate, &[0.0, 0.0], 1e-9),
            Err(Error::SingularSimplex)
        ));
    }
}
