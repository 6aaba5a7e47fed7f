//! Analytic internal-energy models: quadratic wells with optional quartic
//! corrections, their derivatives, stability tests and sampling.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{AxisDescriptor, AxisKind, Conjugate, PointCloud};

/// An extensive variable together with its intensive conjugate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePairDescriptor {
    pub name: String,
    pub intensive_name: String,
    /// Maps the raw slope `dU/dX` to the conventional intensive value.
    pub sign: i8,
    #[serde(default)]
    pub unit: String,
    #[serde(default)]
    pub intensive_unit: String,
}

impl ConjugatePairDescriptor {
    pub fn new(name: impl Into<String>, intensive_name: impl Into<String>, sign: i8) -> Self {
        ConjugatePairDescriptor {
            name: name.into(),
            intensive_name: intensive_name.into(),
            sign,
            unit: String::new(),
            intensive_unit: String::new(),
        }
    }

    pub fn axis(&self) -> AxisDescriptor {
        AxisDescriptor {
            name: self.name.clone(),
            kind: AxisKind::Extensive,
            unit: self.unit.clone(),
            conjugate: Some(Conjugate {
                name: self.intensive_name.clone(),
                sign: self.sign,
                unit: self.intensive_unit.clone(),
            }),
        }
    }
}

/// Non-convex or stiffening term added to a quadratic well, in offsets
/// `d = x - minimum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Correction {
    /// `sum_i c_i d_i^4`
    Quartic { coefficients: Vec<f64> },
    /// `c |d|^4`
    RadialQuartic { coefficient: f64 },
}

/// `U = base_energy + d^T H d / 2 + correction(d)` with `d = x - minimum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub base_energy: f64,
    pub minimum: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction: Option<Correction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub label: String,
    pub well: Well,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticModel {
    pub variables: Vec<ConjugatePairDescriptor>,
    pub phases: Vec<Phase>,
}

impl Well {
    fn offsets(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.minimum).map(|(a, b)| a - b).collect()
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let d = self.offsets(x);
        let w = d.len();
        let mut quad = 0.0;
        for i in 0..w {
            for j in 0..w {
                quad += d[i] * self.hessian[i][j] * d[j];
            }
        }
        let extra = match &self.correction {
            None => 0.0,
            Some(Correction::Quartic { coefficients }) => coefficients
                .iter()
                .zip(&d)
                .map(|(c, v)| c * v.powi(4))
                .sum(),
            Some(Correction::RadialQuartic { coefficient }) => {
                let r2: f64 = d.iter().map(|v| v * v).sum();
                coefficient * r2 * r2
            }
        };
        self.base_energy + 0.5 * quad + extra
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let d = self.offsets(x);
        let w = d.len();
        let r2: f64 = d.iter().map(|v| v * v).sum();
        (0..w)
            .map(|i| {
                let lin: f64 = (0..w).map(|j| self.hessian[i][j] * d[j]).sum();
                let extra = match &self.correction {
                    None => 0.0,
                    Some(Correction::Quartic { coefficients }) => {
                        4.0 * coefficients[i] * d[i].powi(3)
                    }
                    Some(Correction::RadialQuartic { coefficient }) => {
                        4.0 * coefficient * r2 * d[i]
                    }
                };
                lin + extra
            })
            .collect()
    }

    /// Hessian assembled from its upper triangle, so it is exactly symmetric.
    pub fn hessian_at(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let d = self.offsets(x);
        let w = d.len();
        let r2: f64 = d.iter().map(|v| v * v).sum();
        let mut h = vec![vec![0.0; w]; w];
        for i in 0..w {
            for j in i..w {
                let extra = match &self.correction {
                    None => 0.0,
                    Some(Correction::Quartic { coefficients }) => {
                        if i == j {
                            12.0 * coefficients[i] * d[i] * d[i]
                        } else {
                            0.0
                        }
                    }
                    Some(Correction::RadialQuartic { coefficient }) => {
                        4.0 * coefficient * (2.0 * d[i] * d[j] + if i == j { r2 } else { 0.0 })
                    }
                };
                h[i][j] = self.hessian[i][j] + extra;
                h[j][i] = h[i][j];
            }
        }
        h
    }

    pub fn is_quadratic(&self) -> bool {
        self.correction.is_none()
    }
}

impl AnalyticModel {
    pub fn work_dims(&self) -> usize {
        self.variables.len()
    }

    pub fn axes(&self) -> Vec<AxisDescriptor> {
        self.variables
            .iter()
            .map(ConjugatePairDescriptor::axis)
            .collect()
    }

    pub fn phase(&self, label: &str) -> Result<&Phase> {
        self.phases
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| Error::UnknownPhase(label.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.work_dims();
        for (i, v) in self.variables.iter().enumerate() {
            if v.sign != 1 && v.sign != -1 {
                return Err(Error::validation(
                    format!("/variables/{i}/sign"),
                    "sign must be +1 or -1",
                ));
            }
        }
        for (p, phase) in self.phases.iter().enumerate() {
            let well = &phase.well;
            let at = |s: &str| format!("/phases/{p}/well/{s}");
            if well.minimum.len() != w {
                return Err(Error::validation(
                    at("minimum"),
                    format!("expected {w} coordinates"),
                ));
            }
            if well.hessian.len() != w || well.hessian.iter().any(|r| r.len() != w) {
                return Err(Error::validation(
                    at("hessian"),
                    format!("expected a {w}x{w} matrix"),
                ));
            }
            for i in 0..w {
                for j in 0..w {
                    if well.hessian[i][j] != well.hessian[j][i] {
                        return Err(Error::validation(at("hessian"), "matrix is not symmetric"));
                    }
                }
            }
            match &well.correction {
                None if min_eigenvalue(&well.hessian) <= 0.0 => {
                    return Err(Error::validation(
                        at("hessian"),
                        "a well without correction must be positive definite",
                    ));
                }
                Some(Correction::Quartic { coefficients }) if coefficients.len() != w => {
                    return Err(Error::validation(
                        at("correction/coefficients"),
                        format!("expected {w} coefficients"),
                    ));
                }
                _ => {}
            }
            if self.phases[..p].iter().any(|q| q.label == phase.label) {
                return Err(Error::validation(
                    format!("/phases/{p}/label"),
                    "duplicate phase label",
                ));
            }
        }
        Ok(())
    }

    fn well_checked(&self, phase: &str, x: &[f64]) -> Result<&Well> {
        let p = self.phase(phase)?;
        if x.len() != self.work_dims() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                self.work_dims(),
                x.len()
            )));
        }
        Ok(&p.well)
    }
}

pub fn evaluate_energy(model: &AnalyticModel, phase: &str, x: &[f64]) -> Result<f64> {
    Ok(model.well_checked(phase, x)?.energy(x))
}

/// Raw conjugate vector `Y = dU/dX`.
pub fn gradient(model: &AnalyticModel, phase: &str, x: &[f64]) -> Result<Vec<f64>> {
    Ok(model.well_checked(phase, x)?.gradient(x))
}

pub fn hessian(model: &AnalyticModel, phase: &str, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    Ok(model.well_checked(phase, x)?.hessian_at(x))
}

pub fn min_eigenvalue(h: &[Vec<f64>]) -> f64 {
    let w = h.len();
    if w == 0 {
        return f64::INFINITY;
    }
    let m = DMatrix::from_fn(w, w, |i, j| h[i][j]);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// True iff every Hessian eigenvalue at `x` exceeds `tolerance`.
pub fn is_locally_stable(
    model: &AnalyticModel,
    phase: &str,
    x: &[f64],
    tolerance: f64,
) -> Result<bool> {
    Ok(min_eigenvalue(&hessian(model, phase, x)?) > tolerance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridAnchor {
    /// Axis bounds are absolute coordinates shared by all phases.
    #[default]
    Absolute,
    /// Axis bounds are offsets from each phase's well minimum.
    WellMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Per-axis `(min, max, count)` with row-major node order (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
    #[serde(default)]
    pub anchor: GridAnchor,
}

impl GridSpec {
    pub fn uniform(axes: &[(f64, f64, usize)]) -> Self {
        GridSpec {
            axes: axes
                .iter()
                .map(|&(min, max, count)| GridAxis { min, max, count })
                .collect(),
            anchor: GridAnchor::Absolute,
        }
    }

    fn check(&self, w: usize) -> Result<()> {
        if self.axes.len() != w {
            return Err(Error::EmptyGrid(format!(
                "grid has {} axes, model has {w}",
                self.axes.len()
            )));
        }
        for (k, a) in self.axes.iter().enumerate() {
            if a.count < 2 || !a.min.is_finite() || !a.max.is_finite() || a.max <= a.min {
                return Err(Error::EmptyGrid(format!(
                    "axis {k} needs finite bounds min < max and at least 2 nodes"
                )));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    fn coordinate(&self, k: usize, i: usize, origin: f64) -> f64 {
        let a = &self.axes[k];
        let t = i as f64 / (a.count - 1) as f64;
        origin + a.min + t * (a.max - a.min)
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            idx[k] = flat % self.axes[k].count;
            flat /= self.axes[k].count;
        }
        idx
    }

    /// Nodes for a phase whose well minimum is `minimum`.
    pub fn nodes(&self, minimum: &[f64]) -> Vec<Vec<f64>> {
        let origin = |k: usize| match self.anchor {
            GridAnchor::Absolute => 0.0,
            GridAnchor::WellMinimum => minimum[k],
        };
        (0..self.node_count())
            .map(|flat| {
                self.multi_index(flat)
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| self.coordinate(k, i, origin(k)))
                    .collect()
            })
            .collect()
    }
}

/// One `LabeledPoint` per `(phase, node)`, phases in model order.
pub fn sample_surface(model: &AnalyticModel, grid: &GridSpec) -> Result<PointCloud> {
    grid.check(model.work_dims())?;
    let mut samples = Vec::with_capacity(model.phases.len() * grid.node_count());
    for phase in &model.phases {
        for x in grid.nodes(&phase.well.minimum) {
            let e = evaluate_energy(model, &phase.label, &x)?;
            samples.push((phase.label.clone(), x, e));
        }
    }
    PointCloud::from_samples(model.axes(), samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinodalPoint {
    pub x: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Unit vector pointing from `x` toward the adjacent stable side.
    pub toward_stable: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinodalLocus {
    pub phase: String,
    pub points: Vec<SpinodalPoint>,
}

/// Zero crossings of the smallest Hessian eigenvalue along grid edges,
/// refined by bisection until `|lambda_min| <= tolerance`.
pub fn spinodal_locus(
    model: &AnalyticModel,
    phase: &str,
    grid: &GridSpec,
    tolerance: f64,
) -> Result<SpinodalLocus> {
    let well = &model.phase(phase)?.well;
    grid.check(model.work_dims())?;
    let nodes = grid.nodes(&well.minimum);
    let lambda = |x: &[f64]| min_eigenvalue(&well.hessian_at(x));
    let values: Vec<f64> = nodes.iter().map(|x| lambda(x)).collect();
    let w = model.work_dims();
    let mut points = Vec::new();
    for (flat, x) in nodes.iter().enumerate() {
        let idx = grid.multi_index(flat);
        let mut stride = 1;
        for k in (0..w).rev() {
            if idx[k] + 1 < grid.axes[k].count {
                let other = flat + stride;
                let (la, lb) = (values[flat], values[other]);
                if (la > tolerance) != (lb > tolerance) {
                    if let Some(p) = bisect(&lambda, x, &nodes[other], la, tolerance) {
                        points.push(p);
                    }
                }
            }
            stride *= grid.axes[k].count;
        }
    }
    Ok(SpinodalLocus {
        phase: phase.to_string(),
        points,
    })
}

fn bisect(
    lambda: &impl Fn(&[f64]) -> f64,
    a: &[f64],
    b: &[f64],
    la: f64,
    tolerance: f64,
) -> Option<SpinodalPoint> {
    let (mut stable, mut unstable) = if la > tolerance {
        (a.to_vec(), b.to_vec())
    } else {
        (b.to_vec(), a.to_vec())
    };
    let dir: Vec<f64> = {
        let v: Vec<f64> = stable.iter().zip(&unstable).map(|(s, u)| s - u).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.iter().map(|c| c / n).collect()
    };
    for _ in 0..200 {
        let mid: Vec<f64> = stable
            .iter()
            .zip(&unstable)
            .map(|(s, u)| 0.5 * (s + u))
            .collect();
        let lm = lambda(&mid);
        if lm.abs() <= tolerance {
            return Some(SpinodalPoint {
                x: mid,
                min_eigenvalue: lm,
                toward_stable: dir,
            });
        }
        if lm > tolerance {
            stable = mid;
        } else {
            unstable = mid;
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DemoEntry {
    model: AnalyticModel,
    grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DemoFile {
    version: String,
    models: BTreeMap<String, DemoEntry>,
}

const DEMO_VERSION: &str = "gibbsd-demo/1";
const BUILTIN_DEMOS: &str = include_str!("../data/demo_models.json");

/// Demo models keyed by name, each with its default sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoSet {
    models: BTreeMap<String, DemoEntry>,
}

impl DemoSet {
    pub fn builtin() -> Self {
        DemoSet::parse(BUILTIN_DEMOS).expect("shipped demo parameters are valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: DemoFile = serde_json::from_str(text)?;
        if file.version != DEMO_VERSION {
            return Err(Error::SchemaVersionMismatch {
                expected: DEMO_VERSION.into(),
                found: file.version,
            });
        }
        for (name, entry) in &file.models {
            entry.model.validate().map_err(|e| match e {
                Error::Validation { pointer, message } => {
                    Error::validation(format!("/models/{name}/model{pointer}"), message)
                }
                other => other,
            })?;
            entry.grid.check(entry.model.work_dims())?;
        }
        Ok(DemoSet {
            models: file.models,
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.models.keys().map(String::as_str).collect()
    }

    pub fn model(&self, name: &str) -> Result<AnalyticModel> {
        self.entry(name).map(|e| e.model.clone())
    }

    pub fn grid(&self, name: &str) -> Result<GridSpec> {
        self.entry(name).map(|e| e.grid.clone())
    }

    fn entry(&self, name: &str) -> Result<&DemoEntry> {
        self.models
            .get(name)
            .ok_or_else(|| Error::UnknownDemo(name.to_string()))
    }
}

/// One of the shipped demo models: `waterlike`, `doublewell` or `vo2strain`.
pub fn builtin_demo_model(name: &str) -> Result<AnalyticModel> {
    DemoSet::builtin().model(name)
}

pub fn builtin_demo_grid(name: &str) -> Result<GridSpec> {
    DemoSet::builtin().grid(name)
}
