//! Coexistence simplices, the generalized phase rule and the lever rule.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{barycentric_coordinates, AxisDescriptor, LowerHull};
use crate::linalg::centered_singular_values;

pub const DEFAULT_SPACING_THRESHOLD: f64 = 3.0;
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-3;
/// Relative agreement of facet gradients treated as a single tangent plane.
pub const DEFAULT_GRADIENT_TOLERANCE: f64 = 1e-8;

/// `F = W - P + 1`.
pub fn generalized_phase_rule(work: usize, phases: usize) -> Result<usize> {
    if phases == 0 {
        return Err(Error::InvalidArgument(
            "at least one phase is required".into(),
        ));
    }
    if phases > work + 1 {
        return Err(Error::ExceedsMaxCoexistence {
            work,
            phases,
            max: work + 1,
        });
    }
    Ok(work + 1 - phases)
}

/// Number of phases whose coexistence leaves `dof` degrees of freedom.
pub fn phases_for_dof(work: usize, dof: usize) -> Result<usize> {
    if dof > work {
        return Err(Error::InvalidArgument(format!(
            "F = {dof} exceeds W = {work}"
        )));
    }
    Ok(work + 1 - dof)
}

/// The work-pair count `W = C + 1` under which `W - P + 1 = C - P + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicRuleMapping {
    pub components: usize,
    pub work: usize,
}

impl ClassicRuleMapping {
    /// `F = C - P + 2`.
    pub fn classic_dof(&self, phases: usize) -> Option<usize> {
        (self.components + 2).checked_sub(phases)
    }

    pub fn generalized_dof(&self, phases: usize) -> Result<usize> {
        generalized_phase_rule(self.work, phases)
    }
}

/// Thermal pair, pressure-volume pair and `C` chemical pairs, less one
/// affine constraint on the mole fractions.
pub fn classic_rule_equivalence(components: usize) -> Result<ClassicRuleMapping> {
    if components == 0 {
        return Err(Error::InvalidArgument(
            "at least one component is required".into(),
        ));
    }
    Ok(ClassicRuleMapping {
        components,
        work: components + 1,
    })
}

/// `F_X = W - I` for a diagram with `I` intensive axes.
pub fn extensive_dof(work: usize, intensive: usize) -> Result<usize> {
    work.checked_sub(intensive)
        .ok_or_else(|| Error::InvalidArgument(format!("I = {intensive} exceeds W = {work}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimplexKind {
    IntraPhase,
    Coexistence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceSimplex {
    pub facet_id: usize,
    pub vertices: Vec<usize>,
    pub vertex_x: Vec<Vec<f64>>,
    /// Sorted phase labels of the vertices, with repetition.
    pub phase_multiset: Vec<String>,
    /// Region label: the distinct phases, or `[X, X]` for a single-phase gap.
    pub label: Vec<String>,
    pub p: usize,
    /// Raw tangent gradient `dU/dX`.
    pub intensive: Vec<f64>,
    pub offset: f64,
    pub f: usize,
    pub kind: SimplexKind,
}

impl CoexistenceSimplex {
    /// Intensive values after the per-axis sign convention.
    pub fn conventional_intensive(&self, variables: &[AxisDescriptor]) -> Vec<f64> {
        self.intensive
            .iter()
            .zip(variables)
            .map(|(g, v)| v.intensive_sign() * g)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetGroup {
    pub label: Vec<String>,
    pub kind: SimplexKind,
    pub p: usize,
    pub f: usize,
    pub facet_ids: Vec<usize>,
}

/// Adjacent coexistence facets sharing one tangent plane whose labels
/// together exceed the `d` phases any single simplex can carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidentGroup {
    pub facet_ids: Vec<usize>,
    pub phases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceReport {
    pub work_dims: usize,
    pub variables: Vec<AxisDescriptor>,
    pub spacing_threshold: f64,
    pub simplices: Vec<CoexistenceSimplex>,
    pub groups: Vec<FacetGroup>,
    pub metastable: Vec<usize>,
    pub counts_by_p: BTreeMap<usize, usize>,
    pub coincident: Vec<CoincidentGroup>,
    pub warnings: Vec<String>,
}

impl CoexistenceReport {
    pub fn simplices_with_p(&self, p: usize) -> impl Iterator<Item = &CoexistenceSimplex> {
        self.simplices.iter().filter(move |s| s.p == p)
    }

    pub fn group(&self, label: &[String]) -> Option<&FacetGroup> {
        self.groups.iter().find(|g| g.label == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub spacing_threshold: f64,
    pub gradient_tolerance: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            spacing_threshold: DEFAULT_SPACING_THRESHOLD,
            gradient_tolerance: DEFAULT_GRADIENT_TOLERANCE,
        }
    }
}

pub fn classify_facets(hull: &LowerHull, spacing_threshold: f64) -> Result<CoexistenceReport> {
    classify_facets_with(
        hull,
        &ClassifyOptions {
            spacing_threshold,
            ..ClassifyOptions::default()
        },
    )
}

/// Nearest same-phase neighbor distances in bounding-box units, computed on
/// demand per point index.
struct LocalSpacing<'a> {
    hull: &'a LowerHull,
    span: Vec<f64>,
    cache: BTreeMap<usize, f64>,
}

impl<'a> LocalSpacing<'a> {
    fn new(hull: &'a LowerHull) -> Self {
        let span = hull
            .cloud
            .bounds()
            .iter()
            .map(|&(lo, hi)| if hi > lo { hi - lo } else { 1.0 })
            .collect();
        LocalSpacing {
            hull,
            span,
            cache: BTreeMap::new(),
        }
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.span)
            .map(|((x, y), s)| ((x - y) / s).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn nearest(&mut self, index: usize) -> f64 {
        if let Some(&d) = self.cache.get(&index) {
            return d;
        }
        let p = self
            .hull
            .point(index)
            .expect("facet vertex is a cloud point");
        let d = self
            .hull
            .cloud
            .points
            .iter()
            .filter(|q| q.index != index && q.phase == p.phase)
            .map(|q| self.distance(&p.x, &q.x))
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        self.cache.insert(index, d);
        d
    }
}

pub fn classify_facets_with(hull: &LowerHull, opts: &ClassifyOptions) -> Result<CoexistenceReport> {
    if !(opts.spacing_threshold > 0.0) {
        return Err(Error::InvalidArgument(
            "spacing threshold must be positive".into(),
        ));
    }
    let w = hull.work_dims();
    let mut spacing = LocalSpacing::new(hull);
    let mut simplices = Vec::with_capacity(hull.facets.len());
    for facet in &hull.facets {
        let pts = hull.facet_points(facet);
        let mut multiset: Vec<String> = pts.iter().map(|p| p.phase.clone()).collect();
        multiset.sort();
        let distinct: Vec<String> = multiset
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let p = distinct.len();
        let f = generalized_phase_rule(w, p)?;
        let gap = p == 1
            && (0..pts.len()).any(|i| {
                (i + 1..pts.len()).any(|j| {
                    let local = spacing
                        .nearest(pts[i].index)
                        .max(spacing.nearest(pts[j].index));
                    spacing.distance(&pts[i].x, &pts[j].x) > opts.spacing_threshold * local
                })
            });
        let (kind, label) = if p >= 2 {
            (SimplexKind::Coexistence, distinct)
        } else if gap {
            (
                SimplexKind::Coexistence,
                vec![distinct[0].clone(), distinct[0].clone()],
            )
        } else {
            (SimplexKind::IntraPhase, distinct)
        };
        simplices.push(CoexistenceSimplex {
            facet_id: facet.id,
            vertices: facet.vertices.clone(),
            vertex_x: pts.iter().map(|p| p.x.clone()).collect(),
            phase_multiset: multiset,
            label,
            p,
            intensive: facet.hyperplane.gradient.clone(),
            offset: facet.hyperplane.offset,
            f,
            kind,
        });
    }

    let mut by_label: BTreeMap<(Vec<String>, SimplexKind), Vec<usize>> = BTreeMap::new();
    let mut counts_by_p = BTreeMap::new();
    for s in &simplices {
        by_label
            .entry((s.label.clone(), s.kind))
            .or_default()
            .push(s.facet_id);
        *counts_by_p.entry(s.p).or_insert(0) += 1;
    }
    let groups = by_label
        .into_iter()
        .map(|((label, kind), facet_ids)| {
            let first = &simplices[facet_ids[0]];
            FacetGroup {
                p: first.p,
                f: first.f,
                label,
                kind,
                facet_ids,
            }
        })
        .collect();

    let coincident = coincident_groups(hull, &simplices, opts.gradient_tolerance);
    let warnings = coincident
        .iter()
        .map(|g| {
            format!(
                "coincident coexistence: facets {:?} share one tangent plane touching {} phases ({})",
                g.facet_ids,
                g.phases.len(),
                g.phases.join(", ")
            )
        })
        .collect();

    Ok(CoexistenceReport {
        work_dims: w,
        variables: hull.cloud.variables.clone(),
        spacing_threshold: opts.spacing_threshold,
        simplices,
        groups,
        metastable: hull.metastable.clone(),
        counts_by_p,
        coincident,
        warnings,
    })
}

fn coincident_groups(
    hull: &LowerHull,
    simplices: &[CoexistenceSimplex],
    rel_tol: f64,
) -> Vec<CoincidentGroup> {
    let scale = simplices
        .iter()
        .flat_map(|s| s.intensive.iter().map(|g| g.abs()))
        .fold(1.0, f64::max);
    let same = |a: &CoexistenceSimplex, b: &CoexistenceSimplex| {
        a.intensive
            .iter()
            .zip(&b.intensive)
            .all(|(x, y)| (x - y).abs() <= rel_tol * scale)
    };
    let mut parent: Vec<usize> = (0..simplices.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for s in simplices
        .iter()
        .filter(|s| s.kind == SimplexKind::Coexistence)
    {
        for &n in &hull.facets[s.facet_id].neighbors {
            let t = &simplices[n];
            if t.kind == SimplexKind::Coexistence && same(s, t) {
                let (a, b) = (find(&mut parent, s.facet_id), find(&mut parent, n));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for s in simplices
        .iter()
        .filter(|s| s.kind == SimplexKind::Coexistence)
    {
        let root = find(&mut parent, s.facet_id);
        clusters.entry(root).or_default().push(s.facet_id);
    }
    let d = hull.work_dims() + 1;
    clusters
        .into_values()
        .filter_map(|ids| {
            let phases: BTreeSet<String> = ids
                .iter()
                .flat_map(|&i| simplices[i].phase_multiset.iter().cloned())
                .collect();
            (ids.len() > 1 && phases.len() > d).then(|| CoincidentGroup {
                facet_ids: ids,
                phases: phases.into_iter().collect(),
            })
        })
        .collect()
}

/// Phase fractions of `target` within a coexistence simplex: its
/// barycentric weights, one per vertex in `simplex.vertices` order.
pub fn lever_rule(
    simplex: &CoexistenceSimplex,
    target: &[f64],
    tolerance: f64,
) -> Result<Vec<f64>> {
    let weights =
        barycentric_coordinates(&simplex.vertex_x, target, tolerance).map_err(|e| match e {
            Error::OutsideAffineSpan { .. } => Error::OutsideSimplex {
                min_weight: f64::NAN,
            },
            other => other,
        })?;
    let min_weight = weights.iter().copied().fold(f64::INFINITY, f64::min);
    if min_weight < -tolerance {
        return Err(Error::OutsideSimplex { min_weight });
    }
    Ok(weights)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofEstimate {
    pub dof: usize,
    pub facets: usize,
    pub low_confidence: bool,
    pub singular_values: Vec<f64>,
}

/// Normalizes a phase multiset to a region label.
pub fn region_label(multiset: &[String]) -> Vec<String> {
    let distinct: Vec<String> = multiset
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if distinct.len() == 1 && multiset.len() > 1 {
        vec![distinct[0].clone(), distinct[0].clone()]
    } else {
        distinct
    }
}

/// Affine rank of the tangent gradients of every facet carrying `multiset`.
pub fn empirical_dof(
    report: &CoexistenceReport,
    multiset: &[String],
    rank_tolerance: f64,
) -> DofEstimate {
    let label = region_label(multiset);
    let gradients: Vec<Vec<f64>> = report
        .simplices
        .iter()
        .filter(|s| s.label == label)
        .map(|s| s.intensive.clone())
        .collect();
    if gradients.len() < 2 {
        return DofEstimate {
            dof: 0,
            facets: gradients.len(),
            low_confidence: true,
            singular_values: Vec::new(),
        };
    }
    let sv = centered_singular_values(&gradients);
    let top = sv.first().copied().unwrap_or(0.0);
    let dof = if top > 0.0 {
        sv.iter().filter(|&&s| s > rank_tolerance * top).count()
    } else {
        0
    };
    DofEstimate {
        dof,
        facets: gradients.len(),
        low_confidence: false,
        singular_values: sv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::{lower_convex_hull, PointCloud, DEFAULT_TOLERANCE};

    #[test]
    fn phase_rule_values() {
        assert_eq!(generalized_phase_rule(2, 3).unwrap(), 0);
        assert_eq!(generalized_phase_rule(1, 1).unwrap(), 1);
        assert_eq!(phases_for_dof(3, 2).unwrap(), 2);
        assert!(matches!(
            generalized_phase_rule(2, 4),
            Err(Error::ExceedsMaxCoexistence {
                work: 2,
                phases: 4,
                max: 3
            })
        ));
    }

    #[test]
    fn classic_mapping() {
        let m = classic_rule_equivalence(1).unwrap();
        assert_eq!(m.work, 2);
        assert_eq!(m.generalized_dof(3).unwrap(), 0);
        assert_eq!(
            classic_rule_equivalence(3)
                .unwrap()
                .generalized_dof(1)
                .unwrap(),
            4
        );
        assert!(classic_rule_equivalence(0).is_err());
    }

    #[test]
    fn extensive_dof_values() {
        assert_eq!(extensive_dof(2, 1).unwrap(), 1);
        assert_eq!(extensive_dof(2, 0).unwrap(), 2);
        assert_eq!(extensive_dof(2, 2).unwrap(), 0);
        assert!(extensive_dof(1, 2).is_err());
    }

    fn two_parabolas() -> LowerHull {
        let xs: Vec<f64> = (0..=40).map(|i| (i as f64 - 10.0) / 10.0).collect();
        let samples = xs
            .iter()
            .map(|&x| ("a", vec![x], x * x))
            .chain(xs.iter().map(|&x| ("b", vec![x], (x - 2.0) * (x - 2.0))));
        let cloud =
            PointCloud::from_samples(vec![AxisDescriptor::extensive("X")], samples).unwrap();
        lower_convex_hull(&cloud, DEFAULT_TOLERANCE).unwrap()
    }

    #[test]
    fn common_tangent_is_the_only_coexistence_facet() {
        let report = classify_facets(&two_parabolas(), DEFAULT_SPACING_THRESHOLD).unwrap();
        let tie: Vec<_> = report.simplices_with_p(2).collect();
        assert_eq!(tie.len(), 1);
        assert!(tie[0].intensive[0].abs() < 1e-12);
        assert!(report
            .simplices_with_p(1)
            .all(|s| s.kind == SimplexKind::IntraPhase));
        assert!(report.warnings.is_empty());
        let fr = lever_rule(tie[0], &[1.0], 1e-9).unwrap();
        assert!((fr[0] - 0.5).abs() < 1e-15 && (fr[1] - 0.5).abs() < 1e-15);
        assert!(matches!(
            lever_rule(tie[0], &[2.5], 1e-9),
            Err(Error::OutsideSimplex { .. })
        ));
    }

    #[test]
    fn label_normalization() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(region_label(&s(&["b", "a", "a"])), s(&["a", "b"]));
        assert_eq!(region_label(&s(&["a", "a"])), s(&["a", "a"]));
        assert_eq!(region_label(&s(&["a"])), s(&["a"]));
    }
}
