use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Extensive,
    Intensive,
}

/// The intensive partner of an extensive axis, e.g. `T` for `S` or `P` for `V`.
///
/// `sign` maps the raw slope `dU/dX` to the conventional intensive value, so
/// that pressure is reported as `P = -dU/dV`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjugate {
    pub name: String,
    pub sign: i8,
    #[serde(default)]
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDescriptor {
    pub name: String,
    pub kind: AxisKind,
    #[serde(default)]
    pub unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate: Option<Conjugate>,
}

impl AxisDescriptor {
    pub fn extensive(name: impl Into<String>) -> Self {
        AxisDescriptor {
            name: name.into(),
            kind: AxisKind::Extensive,
            unit: String::new(),
            conjugate: None,
        }
    }

    pub fn with_conjugate(mut self, name: impl Into<String>, sign: i8) -> Self {
        self.conjugate = Some(Conjugate {
            name: name.into(),
            sign,
            unit: String::new(),
        });
        self
    }

    /// Name of the intensive conjugate; `Y_<name>` when none was declared.
    pub fn intensive_name(&self) -> String {
        match &self.conjugate {
            Some(c) => c.name.clone(),
            None => format!("Y_{}", self.name),
        }
    }

    pub fn intensive_sign(&self) -> f64 {
        match &self.conjugate {
            Some(c) if c.sign < 0 => -1.0,
            _ => 1.0,
        }
    }
}

/// One sample of a primitive surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub index: usize,
    pub phase: String,
    pub x: Vec<f64>,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub variables: Vec<AxisDescriptor>,
    pub points: Vec<LabeledPoint>,
}

impl PointCloud {
    pub fn new(variables: Vec<AxisDescriptor>, points: Vec<LabeledPoint>) -> Result<Self> {
        let cloud = PointCloud { variables, points };
        cloud.validate()?;
        Ok(cloud)
    }

    /// Builds a cloud from `(phase, x, energy)` triples, numbering points in order.
    pub fn from_samples<S: Into<String>>(
        variables: Vec<AxisDescriptor>,
        samples: impl IntoIterator<Item = (S, Vec<f64>, f64)>,
    ) -> Result<Self> {
        let points = samples
            .into_iter()
            .enumerate()
            .map(|(index, (phase, x, energy))| LabeledPoint {
                index,
                phase: phase.into(),
                x,
                energy,
            })
            .collect();
        PointCloud::new(variables, points)
    }

    /// Number of extensive work coordinates `W`.
    pub fn work_dims(&self) -> usize {
        self.variables.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks the structural invariants, reporting the first violation with a
    /// JSON-pointer style location.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.variables.iter().enumerate() {
            if v.kind != AxisKind::Extensive {
                return Err(Error::validation(
                    format!("/variables/{i}/kind"),
                    "raw clouds carry extensive axes only",
                ));
            }
            if let Some(c) = &v.conjugate {
                if c.sign != 1 && c.sign != -1 {
                    return Err(Error::validation(
                        format!("/variables/{i}/conjugate/sign"),
                        "sign must be +1 or -1",
                    ));
                }
            }
        }
        let w = self.work_dims();
        let mut seen = HashSet::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            if p.x.len() != w {
                return Err(Error::validation(
                    format!("/points/{i}/x"),
                    format!(
                        "point index {} has {} coordinates, expected {w}",
                        p.index,
                        p.x.len()
                    ),
                ));
            }
            if let Some(j) = p.x.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(
                    format!("/points/{i}/x/{j}"),
                    "coordinate is not finite",
                ));
            }
            if !p.energy.is_finite() {
                return Err(Error::validation(
                    format!("/points/{i}/energy"),
                    "energy is not finite",
                ));
            }
            if !seen.insert(p.index) {
                return Err(Error::validation(
                    format!("/points/{i}/index"),
                    format!("duplicate point index {}", p.index),
                ));
            }
        }
        Ok(())
    }

    /// Per-axis `(min, max)` of the extensive coordinates.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.work_dims())
            .map(|k| {
                self.points
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p.x[k]), hi.max(p.x[k]))
                    })
            })
            .collect()
    }

    pub fn energy_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.energy), hi.max(p.energy))
            })
    }

    pub fn axis_position(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }
}
