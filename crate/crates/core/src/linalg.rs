//! Small dense kernels used by the predicates and solvers.

use nalgebra::{DMatrix, DVector};

/// Determinant of a row-major `n x n` matrix by Gaussian elimination with
/// partial pivoting. The buffer is consumed.
pub(crate) fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f != 0.0 {
                for k in col + 1..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    det
}

/// Product of the distances from the first point to every other point.
/// Used as the natural magnitude of an orientation determinant.
pub(crate) fn spread_scale<'a>(points: impl IntoIterator<Item = &'a [f64]>) -> f64 {
    let mut iter = points.into_iter();
    let Some(first) = iter.next() else {
        return 1.0;
    };
    let mut scale = 1.0;
    for p in iter {
        let d2: f64 = p.iter().zip(first).map(|(a, b)| (a - b) * (a - b)).sum();
        scale *= d2.sqrt();
    }
    scale
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Singular values of the centred rows of `rows` (affine spread), descending.
pub(crate) fn centered_singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.len() < 2 {
        return Vec::new();
    }
    let dim = rows[0].len();
    if dim == 0 {
        return Vec::new();
    }
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j] - mean[j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Least-squares solve `a x = b` through an SVD; returns `None` when `a` has
/// deficient column rank relative to `rel_tol`.
pub(crate) fn solve_full_rank(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    rel_tol: f64,
) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 || svd.singular_values.iter().any(|&s| s <= rel_tol * smax) {
        return None;
    }
    svd.solve(b, 0.0).ok()
}
