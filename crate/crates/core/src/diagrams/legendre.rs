use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{min_eigenvalue, AnalyticModel, Well};

/// Transformed potential and the extensive state where the infimum is attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendrePoint {
    pub value: f64,
    pub x: Vec<f64>,
}

const NEWTON_ITERATIONS: usize = 200;
const RELATIVE_CONVERGENCE: f64 = 1e-10;

/// `inf over X_t of [U - sum Y_t X_t]` for the variables named in `transform`,
/// with `y` the conventional intensive values and `x_rest` the remaining
/// extensive coordinates in model order.
pub fn legendre_transform(
    model: &AnalyticModel,
    phase: &str,
    transform: &[&str],
    y: &[f64],
    x_rest: &[f64],
) -> Result<LegendrePoint> {
    let well = &model.phase(phase)?.well;
    let w = model.work_dims();
    let t: Vec<usize> = transform
        .iter()
        .map(|name| {
            model
                .variables
                .iter()
                .position(|v| v.name == *name || v.intensive_name == *name)
                .ok_or_else(|| Error::AxisUnknown(name.to_string()))
        })
        .collect::<Result<_>>()?;
    if y.len() != t.len() {
        return Err(Error::InvalidArgument(format!(
            "{} intensive values for {} variables",
            y.len(),
            t.len()
        )));
    }
    let rest: Vec<usize> = (0..w).filter(|k| !t.contains(k)).collect();
    if x_rest.len() != rest.len()
        || t.iter().collect::<std::collections::BTreeSet<_>>().len() != t.len()
    {
        return Err(Error::InvalidArgument(
            "transformed and remaining variables do not partition the model".into(),
        ));
    }
    let raw: Vec<f64> = t
        .iter()
        .zip(y)
        .map(|(&k, v)| f64::from(model.variables[k].sign) * v)
        .collect();
    let mut base = well.minimum.clone();
    for (&k, &v) in rest.iter().zip(x_rest) {
        base[k] = v;
    }
    let problem = Problem {
        well,
        t: &t,
        raw: &raw,
        base,
    };
    if well.is_quadratic() {
        problem.closed_form()
    } else {
        problem.minimize()
    }
}

struct Problem<'a> {
    well: &'a Well,
    t: &'a [usize],
    raw: &'a [f64],
    base: Vec<f64>,
}

impl Problem<'_> {
    fn point(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.base.clone();
        for (&k, &v) in self.t.iter().zip(z) {
            x[k] = v;
        }
        x
    }

    fn objective(&self, z: &[f64]) -> f64 {
        let x = self.point(z);
        self.well.energy(&x) - self.raw.iter().zip(z).map(|(y, v)| y * v).sum::<f64>()
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let g = self.well.gradient(&self.point(z));
        self.t
            .iter()
            .zip(self.raw)
            .map(|(&k, y)| g[k] - y)
            .collect()
    }

    fn hessian(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let h = self.well.hessian_at(&self.point(z));
        self.t
            .iter()
            .map(|&i| self.t.iter().map(|&j| h[i][j]).collect())
            .collect()
    }

    fn finish(&self, z: Vec<f64>) -> LegendrePoint {
        LegendrePoint {
            value: self.objective(&z),
            x: self.point(&z),
        }
    }

    fn start(&self) -> Vec<f64> {
        self.t.iter().map(|&k| self.well.minimum[k]).collect()
    }

    /// Stationarity `H_tt d_t = Y - H_tr d_r` of the quadratic objective.
    fn closed_form(&self) -> Result<LegendrePoint> {
        let n = self.t.len();
        if n == 0 {
            return Ok(self.finish(Vec::new()));
        }
        let z0 = self.start();
        let h = self.hessian(&z0);
        if min_eigenvalue(&h) <= 0.0 {
            return Err(Error::NonConvexTransform(
                "quadratic form is not positive definite in the transformed variables".into(),
            ));
        }
        let m = DMatrix::from_fn(n, n, |i, j| h[i][j]);
        let g = self.gradient(&z0);
        let rhs = DVector::from_iterator(n, g.iter().map(|v| -v));
        let chol = m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NonConvexTransform("Cholesky factorization failed".into()))?;
        let mut dz = chol.solve(&rhs);
        let r = &rhs - &m * &dz;
        dz += chol.solve(&r);
        let z: Vec<f64> = z0.iter().zip(dz.iter()).map(|(a, b)| a + b).collect();
        Ok(self.finish(z))
    }

    fn newton(&self, mut z: Vec<f64>, scale: f64) -> Option<Vec<f64>> {
        let n = z.len();
        let mut f = self.objective(&z);
        for _ in 0..NEWTON_ITERATIONS {
            let g = self.gradient(&z);
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm <= RELATIVE_CONVERGENCE * scale * 1e-2 {
                return Some(z);
            }
            let h = self.hessian(&z);
            let lam = min_eigenvalue(&h);
            let shift = if lam > 0.0 {
                0.0
            } else {
                1e-3 * scale.max(1.0) - lam
            };
            let m = DMatrix::from_fn(n, n, |i, j| h[i][j] + if i == j { shift } else { 0.0 });
            let step = m
                .cholesky()?
                .solve(&DVector::from_iterator(n, g.iter().map(|v| -v)));
            let mut alpha = 1.0;
            loop {
                let trial: Vec<f64> = z
                    .iter()
                    .zip(step.iter())
                    .map(|(a, s)| a + alpha * s)
                    .collect();
                let ft = self.objective(&trial);
                if ft.is_finite() && ft <= f {
                    let moved = step.norm() * alpha;
                    z = trial;
                    f = ft;
                    if moved <= RELATIVE_CONVERGENCE * z.iter().map(|v| v.abs()).fold(1.0, f64::max)
                    {
                        return Some(z);
                    }
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-12 {
                    return Some(z);
                }
            }
            if !f.is_finite() || z.iter().any(|v| !v.is_finite() || v.abs() > 1e12) {
                return None;
            }
        }
        None
    }

    /// Damped Newton from several starts; the infimum must be a single
    /// strictly convex minimum.
    fn minimize(&self) -> Result<LegendrePoint> {
        let n = self.t.len();
        if n == 0 {
            return Ok(self.finish(Vec::new()));
        }
        let z0 = self.start();
        let h0 = self.hessian(&z0);
        let curvature = h0.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
        let reach = curvature.sqrt().max(1.0);
        let mut starts = vec![z0.clone()];
        for k in 0..n {
            for s in [-2.0, -1.0, 1.0, 2.0] {
                let mut z = z0.clone();
                z[k] += s * reach;
                starts.push(z);
            }
        }
        let mut minima: Vec<(Vec<f64>, f64)> = Vec::new();
        for s in starts {
            let Some(z) = self.newton(s, curvature) else {
                continue;
            };
            if min_eigenvalue(&self.hessian(&z)) <= 0.0 {
                continue;
            }
            let v = self.objective(&z);
            let near = |a: &Vec<f64>| a.iter().zip(&z).all(|(p, q)| (p - q).abs() <= 1e-6 * reach);
            if !minima.iter().any(|(a, _)| near(a)) {
                minima.push((z, v));
            }
        }
        minima.sort_by(|a, b| a.1.total_cmp(&b.1));
        let Some((best, value)) = minima.first().cloned() else {
            return Err(Error::NonConvexTransform(
                "no strictly convex minimum was found".into(),
            ));
        };
        let tie = 1e-9 * value.abs().max(1.0);
        if minima.len() > 1 && minima[1].1 - value <= tie {
            return Err(Error::NonConvexTransform(format!(
                "{} minima attain the infimum",
                minima.iter().filter(|m| m.1 - value <= tie).count()
            )));
        }
        Ok(self.finish(best))
    }
}
