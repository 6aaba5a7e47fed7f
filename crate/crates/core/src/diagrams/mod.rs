//! Phase diagrams in extensive, intensive and mixed axes.

mod export;
mod isopleth;
mod legendre;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::coexistence::{extensive_dof, CoexistenceReport, SimplexKind};
use crate::error::{Error, Result};
use crate::hull::{AxisDescriptor, LowerHull};

pub use export::{
    diagram_from_json, diagram_to_csv, diagram_to_json, diagram_to_svg, export_diagram,
    read_diagram, ExportFormat,
};
pub use isopleth::{slice_isopleth, IsoplethConstraint};
pub use legendre::{legendre_transform, LegendrePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Extensive,
    Intensive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramAxis {
    pub name: String,
    pub representation: Representation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramSpec {
    pub axes: Vec<DiagramAxis>,
    /// SVG canvas size in pixels.
    #[serde(default = "default_resolution")]
    pub resolution: (u32, u32),
    /// Optional fixed plot bounds per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<(f64, f64)>>,
}

fn default_resolution() -> (u32, u32) {
    (640, 480)
}

impl DiagramSpec {
    pub fn new(axes: &[(&str, Representation)]) -> Self {
        DiagramSpec {
            axes: axes
                .iter()
                .map(|&(name, representation)| DiagramAxis {
                    name: name.to_string(),
                    representation,
                })
                .collect(),
            resolution: default_resolution(),
            bounds: None,
        }
    }

    /// Resolves bare axis names against hull variables: extensive names map to
    /// extensive axes and conjugate names to intensive ones.
    pub fn from_names(variables: &[AxisDescriptor], names: &[&str]) -> Result<Self> {
        let axes = names
            .iter()
            .map(|&n| {
                let representation = if variables.iter().any(|v| v.name == n) {
                    Representation::Extensive
                } else if variables.iter().any(|v| v.intensive_name() == n) {
                    Representation::Intensive
                } else {
                    return Err(Error::AxisUnknown(n.to_string()));
                };
                Ok(DiagramAxis {
                    name: n.to_string(),
                    representation,
                })
            })
            .collect::<Result<_>>()?;
        Ok(DiagramSpec {
            axes,
            resolution: default_resolution(),
            bounds: None,
        })
    }

    pub fn intensive_count(&self) -> usize {
        self.axes
            .iter()
            .filter(|a| a.representation == Representation::Intensive)
            .count()
    }

    /// Variable position of each axis.
    fn resolve(&self, variables: &[AxisDescriptor]) -> Result<Vec<usize>> {
        let resolved = self
            .axes
            .iter()
            .map(|a| {
                variables
                    .iter()
                    .position(|v| match a.representation {
                        Representation::Extensive => v.name == a.name,
                        Representation::Intensive => v.intensive_name() == a.name,
                    })
                    .ok_or_else(|| Error::AxisUnknown(a.name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let distinct: BTreeSet<(usize, Representation)> = resolved
            .iter()
            .zip(&self.axes)
            .map(|(&v, a)| (v, a.representation))
            .collect();
        if distinct.len() != resolved.len() {
            return Err(Error::InvalidArgument("an axis appears twice".into()));
        }
        if self.axes.is_empty() {
            return Err(Error::InvalidArgument(
                "a diagram needs at least one axis".into(),
            ));
        }
        Ok(resolved)
    }
}

/// One facet's image in diagram space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub facet_id: usize,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: Vec<String>,
    pub kind: SimplexKind,
    pub p: usize,
    pub f: usize,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    /// Labels of the regions the boundary separates.
    pub between: Vec<Vec<String>>,
    /// Coexistence family whose image traces the boundary, for intensive diagrams.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<String>>,
    pub polylines: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramMetadata {
    pub facets: usize,
    pub intensive_axes: usize,
    pub extensive_dof: usize,
    /// Boundaries are assembled from discrete facet images and depend on sampling.
    pub resolution_dependent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub spec: DiagramSpec,
    pub regions: Vec<Region>,
    pub boundaries: Vec<Boundary>,
    pub metadata: DiagramMetadata,
}

impl PhaseDiagram {
    pub fn cell_count(&self) -> usize {
        self.regions.iter().map(|r| r.cells.len()).sum()
    }

    pub fn region(&self, label: &[&str]) -> Option<&Region> {
        self.regions
            .iter()
            .find(|r| r.label.iter().map(String::as_str).eq(label.iter().copied()))
    }
}

fn check_report(hull: &LowerHull, report: &CoexistenceReport) -> Result<()> {
    if report.simplices.len() != hull.facets.len() || report.work_dims != hull.work_dims() {
        return Err(Error::InvalidArgument(
            "report does not belong to this hull".into(),
        ));
    }
    Ok(())
}

fn group_regions(
    report: &CoexistenceReport,
    mut image: impl FnMut(usize) -> Vec<Vec<f64>>,
) -> Vec<Region> {
    let mut regions: BTreeMap<(Vec<String>, SimplexKind), Region> = BTreeMap::new();
    for s in &report.simplices {
        regions
            .entry((s.label.clone(), s.kind))
            .or_insert_with(|| Region {
                label: s.label.clone(),
                kind: s.kind,
                p: s.p,
                f: s.f,
                cells: Vec::new(),
            })
            .cells
            .push(Cell {
                facet_id: s.facet_id,
                points: image(s.facet_id),
            });
    }
    regions.into_values().collect()
}

fn metadata(
    report: &CoexistenceReport,
    spec: &DiagramSpec,
    resolution_dependent: bool,
) -> Result<DiagramMetadata> {
    Ok(DiagramMetadata {
        facets: report.simplices.len(),
        intensive_axes: spec.intensive_count(),
        extensive_dof: extensive_dof(report.work_dims, spec.intensive_count())?,
        resolution_dependent,
    })
}

/// Joins two-point pieces that share endpoint keys into maximal polylines.
fn chain_segments(pieces: Vec<(Vec<usize>, Vec<Vec<f64>>)>) -> Vec<Vec<Vec<f64>>> {
    if pieces.iter().any(|(k, _)| k.len() != 2) {
        return pieces.into_iter().map(|(_, pts)| pts).collect();
    }
    let mut at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (k, _)) in pieces.iter().enumerate() {
        at.entry(k[0]).or_default().push(i);
        at.entry(k[1]).or_default().push(i);
    }
    let mut used = vec![false; pieces.len()];
    let mut out = Vec::new();
    // Start at chain ends first so open chains come out whole.
    let mut starts: Vec<usize> = (0..pieces.len()).collect();
    starts.sort_by_key(|&i| {
        let (k, _) = &pieces[i];
        (at[&k[0]].len().min(at[&k[1]].len()) != 1, i)
    });
    for s in starts {
        if used[s] {
            continue;
        }
        used[s] = true;
        let (k, pts) = &pieces[s];
        let (mut keys, mut line) = if at[&k[1]].len() == 1 && at[&k[0]].len() != 1 {
            (vec![k[1], k[0]], vec![pts[1].clone(), pts[0].clone()])
        } else {
            (k.clone(), pts.clone())
        };
        loop {
            let tail = *keys.last().expect("non-empty chain");
            let Some(&next) = at[&tail].iter().find(|&&j| !used[j]) else {
                break;
            };
            used[next] = true;
            let (nk, np) = &pieces[next];
            let (key, pt) = if nk[0] == tail {
                (nk[1], &np[1])
            } else {
                (nk[0], &np[0])
            };
            keys.push(key);
            line.push(pt.clone());
        }
        out.push(line);
    }
    out
}

/// Facet projections onto extensive axes; boundaries are projected ridges
/// shared by facets of different regions.
pub fn project_extensive(
    hull: &LowerHull,
    report: &CoexistenceReport,
    spec: &DiagramSpec,
) -> Result<PhaseDiagram> {
    check_report(hull, report)?;
    if spec.intensive_count() != 0 {
        return Err(Error::InvalidArgument(
            "extensive projection needs all-extensive axes".into(),
        ));
    }
    let axes = spec.resolve(&hull.cloud.variables)?;
    let project = |i: usize| -> Vec<f64> {
        let p = hull.point(i).expect("facet vertex is a cloud point");
        axes.iter().map(|&k| p.x[k]).collect()
    };
    let regions = group_regions(report, |id| {
        hull.facets[id]
            .vertices
            .iter()
            .map(|&v| project(v))
            .collect()
    });

    let mut pieces: BTreeMap<(Vec<String>, Vec<String>), Vec<(Vec<usize>, Vec<Vec<f64>>)>> =
        BTreeMap::new();
    for facet in &hull.facets {
        for &n in facet.neighbors.iter().filter(|&&n| n > facet.id) {
            let (a, b) = (&report.simplices[facet.id], &report.simplices[n]);
            if a.label == b.label && a.kind == b.kind {
                continue;
            }
            let ridge: Vec<usize> = facet
                .vertices
                .iter()
                .copied()
                .filter(|v| hull.facets[n].vertices.contains(v))
                .collect();
            let key = if a.label <= b.label {
                (a.label.clone(), b.label.clone())
            } else {
                (b.label.clone(), a.label.clone())
            };
            let pts = ridge.iter().map(|&v| project(v)).collect();
            pieces.entry(key).or_default().push((ridge, pts));
        }
    }
    let boundaries = pieces
        .into_iter()
        .map(|((a, b), p)| Boundary {
            between: vec![a, b],
            family: None,
            polylines: chain_segments(p),
        })
        .collect();
    Ok(PhaseDiagram {
        spec: spec.clone(),
        regions,
        boundaries,
        metadata: metadata(report, spec, false)?,
    })
}

/// Orders the facets of one family into polylines by walking adjacency.
fn adjacency_order(hull: &LowerHull, members: &[usize]) -> Vec<Vec<usize>> {
    let set: BTreeSet<usize> = members.iter().copied().collect();
    let nbrs = |f: usize| -> Vec<usize> {
        hull.facets[f]
            .neighbors
            .iter()
            .copied()
            .filter(|n| set.contains(n))
            .collect()
    };
    let mut visited = BTreeSet::new();
    let mut lines = Vec::new();
    let mut order: Vec<usize> = members.to_vec();
    order.sort_by_key(|&f| (nbrs(f).len(), f));
    for start in order {
        if visited.contains(&start) {
            continue;
        }
        let mut line = vec![start];
        visited.insert(start);
        let mut cur = start;
        while let Some(next) = nbrs(cur).into_iter().find(|n| !visited.contains(n)) {
            visited.insert(next);
            line.push(next);
            cur = next;
        }
        lines.push(line);
    }
    lines
}

/// Each facet becomes the point of its sign-mapped gradient. Coexistence
/// families trace the boundaries between the regions of their member phases.
pub fn dual_intensive(
    hull: &LowerHull,
    report: &CoexistenceReport,
    spec: &DiagramSpec,
) -> Result<PhaseDiagram> {
    check_report(hull, report)?;
    if spec.intensive_count() != spec.axes.len() {
        return Err(Error::InvalidArgument(
            "an intensive diagram needs all-intensive axes".into(),
        ));
    }
    let axes = spec.resolve(&report.variables)?;
    let image = |id: usize| -> Vec<f64> {
        let y = report.simplices[id].conventional_intensive(&report.variables);
        axes.iter().map(|&k| y[k]).collect()
    };
    let regions = group_regions(report, |id| vec![image(id)]);
    let boundaries = regions
        .iter()
        .filter(|r| r.kind == SimplexKind::Coexistence)
        .map(|r| {
            let ids: Vec<usize> = r.cells.iter().map(|c| c.facet_id).collect();
            let between = if r.p >= 2 {
                r.label.iter().map(|l| vec![l.clone()]).collect()
            } else {
                vec![vec![r.label[0].clone()]]
            };
            Boundary {
                between,
                family: Some(r.label.clone()),
                polylines: adjacency_order(hull, &ids)
                    .into_iter()
                    .map(|line| line.into_iter().map(image).collect())
                    .collect(),
            }
        })
        .collect();
    Ok(PhaseDiagram {
        spec: spec.clone(),
        regions,
        boundaries,
        metadata: metadata(report, spec, true)?,
    })
}

/// Each facet maps to its fixed intensive coordinates crossed with the
/// projected extent of its vertices along the extensive axes.
pub fn mixed_axes(
    hull: &LowerHull,
    report: &CoexistenceReport,
    spec: &DiagramSpec,
) -> Result<PhaseDiagram> {
    check_report(hull, report)?;
    let axes = spec.resolve(&hull.cloud.variables)?;
    let image = |id: usize| -> Vec<Vec<f64>> {
        let y = report.simplices[id].conventional_intensive(&report.variables);
        hull.facets[id]
            .vertices
            .iter()
            .map(|&v| {
                let p = hull.point(v).expect("facet vertex is a cloud point");
                axes.iter()
                    .zip(&spec.axes)
                    .map(|(&k, a)| match a.representation {
                        Representation::Extensive => p.x[k],
                        Representation::Intensive => y[k],
                    })
                    .collect()
            })
            .collect()
    };
    let regions = group_regions(report, image);
    Ok(PhaseDiagram {
        spec: spec.clone(),
        regions,
        boundaries: Vec::new(),
        metadata: metadata(report, spec, true)?,
    })
}

/// Dispatches on the mix of axis representations.
pub fn build_diagram(
    hull: &LowerHull,
    report: &CoexistenceReport,
    spec: &DiagramSpec,
) -> Result<PhaseDiagram> {
    match spec.intensive_count() {
        0 => project_extensive(hull, report, spec),
        i if i == spec.axes.len() => dual_intensive(hull, report, spec),
        _ => mixed_axes(hull, report, spec),
    }
}
