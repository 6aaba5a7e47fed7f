//! The derived surface: lower convex hull of a labeled point cloud.

mod cloud;
mod geometry;
mod incremental;
mod predicate;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub use cloud::{AxisDescriptor, AxisKind, Conjugate, LabeledPoint, PointCloud};
pub use geometry::{barycentric_coordinates, facet_hyperplane, Hyperplane};

use crate::combinatorics::for_each_combination;
use crate::error::{Error, Result};
use predicate::Lifted;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DIMENSION_CAP: usize = 8;
pub const ORACLE_POINT_LIMIT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullOptions {
    pub tolerance: f64,
    pub dimension_cap: usize,
}

impl Default for HullOptions {
    fn default() -> Self {
        HullOptions {
            tolerance: DEFAULT_TOLERANCE,
            dimension_cap: DIMENSION_CAP,
        }
    }
}

/// A `(d-1)`-simplex of the derived surface; `vertices` are sorted point indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub id: usize,
    pub vertices: Vec<usize>,
    pub hyperplane: Hyperplane,
    pub neighbors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerHull {
    pub cloud: PointCloud,
    pub facets: Vec<Facet>,
    /// Sorted indices of points that appear in some facet.
    pub hull_vertices: Vec<usize>,
    /// Sorted indices of points that appear in no facet.
    pub metastable: Vec<usize>,
    pub tolerance: f64,
    positions: HashMap<usize, usize>,
}

impl LowerHull {
    /// Assembles a hull from facet vertex-index sets, recomputing planes and
    /// adjacency. Facets are ordered lexicographically by their vertex sets.
    pub fn from_vertex_sets(
        cloud: PointCloud,
        mut sets: Vec<Vec<usize>>,
        tolerance: f64,
    ) -> Result<Self> {
        let positions: HashMap<usize, usize> = cloud
            .points
            .iter()
            .enumerate()
            .map(|(pos, p)| (p.index, pos))
            .collect();
        for s in &mut sets {
            s.sort_unstable();
        }
        sets.sort();
        sets.dedup();
        let mut facets = Vec::with_capacity(sets.len());
        for (id, vertices) in sets.into_iter().enumerate() {
            let pts: Vec<&LabeledPoint> = vertices
                .iter()
                .map(|i| {
                    positions.get(i).map(|&p| &cloud.points[p]).ok_or_else(|| {
                        Error::validation(
                            format!("/facets/{id}/vertices"),
                            format!("unknown point index {i}"),
                        )
                    })
                })
                .collect::<Result<_>>()?;
            let xs: Vec<&[f64]> = pts.iter().map(|p| p.x.as_slice()).collect();
            let es: Vec<f64> = pts.iter().map(|p| p.energy).collect();
            let hyperplane = facet_hyperplane(&xs, &es)?;
            facets.push(Facet {
                id,
                vertices,
                hyperplane,
                neighbors: Vec::new(),
            });
        }
        let mut ridges: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for f in &facets {
            for skip in 0..f.vertices.len() {
                let ridge: Vec<usize> = f
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                ridges.entry(ridge).or_default().push(f.id);
            }
        }
        for owners in ridges.values() {
            for &a in owners {
                for &b in owners {
                    if a != b {
                        facets[a].neighbors.push(b);
                    }
                }
            }
        }
        for f in &mut facets {
            f.neighbors.sort_unstable();
            f.neighbors.dedup();
        }
        let mut on_hull: Vec<usize> = facets
            .iter()
            .flat_map(|f| f.vertices.iter().copied())
            .collect();
        on_hull.sort_unstable();
        on_hull.dedup();
        let mut metastable: Vec<usize> = cloud
            .points
            .iter()
            .map(|p| p.index)
            .filter(|i| on_hull.binary_search(i).is_err())
            .collect();
        metastable.sort_unstable();
        Ok(LowerHull {
            cloud,
            facets,
            hull_vertices: on_hull,
            metastable,
            tolerance,
            positions,
        })
    }

    /// Reassembles a hull from stored facets, checking that every vertex is a
    /// cloud point and that adjacency is symmetric.
    pub fn from_parts(cloud: PointCloud, facets: Vec<Facet>, tolerance: f64) -> Result<Self> {
        cloud.validate()?;
        let positions: HashMap<usize, usize> = cloud
            .points
            .iter()
            .enumerate()
            .map(|(pos, p)| (p.index, pos))
            .collect();
        let d = cloud.work_dims() + 1;
        for (i, f) in facets.iter().enumerate() {
            if f.id != i {
                return Err(Error::validation(
                    format!("/facets/{i}/id"),
                    format!("expected id {i}"),
                ));
            }
            if f.vertices.len() != d || f.vertices.iter().any(|v| !positions.contains_key(v)) {
                return Err(Error::validation(
                    format!("/facets/{i}/vertices"),
                    format!("a facet needs {d} known point indices"),
                ));
            }
            if f.hyperplane.gradient.len() != d - 1 {
                return Err(Error::validation(
                    format!("/facets/{i}/hyperplane/gradient"),
                    "wrong gradient length",
                ));
            }
            for &n in &f.neighbors {
                if facets.get(n).is_none_or(|g| !g.neighbors.contains(&i)) {
                    return Err(Error::validation(
                        format!("/facets/{i}/neighbors"),
                        "adjacency is not symmetric",
                    ));
                }
            }
        }
        let mut on_hull: Vec<usize> = facets
            .iter()
            .flat_map(|f| f.vertices.iter().copied())
            .collect();
        on_hull.sort_unstable();
        on_hull.dedup();
        let mut metastable: Vec<usize> = cloud
            .points
            .iter()
            .map(|p| p.index)
            .filter(|i| on_hull.binary_search(i).is_err())
            .collect();
        metastable.sort_unstable();
        Ok(LowerHull {
            cloud,
            facets,
            hull_vertices: on_hull,
            metastable,
            tolerance,
            positions,
        })
    }

    pub fn work_dims(&self) -> usize {
        self.cloud.work_dims()
    }

    pub fn point(&self, index: usize) -> Option<&LabeledPoint> {
        self.positions.get(&index).map(|&p| &self.cloud.points[p])
    }

    /// Points of a facet in vertex order.
    pub fn facet_points(&self, facet: &Facet) -> Vec<&LabeledPoint> {
        facet
            .vertices
            .iter()
            .filter_map(|&i| self.point(i))
            .collect()
    }

    /// Facet vertex index sets, the representation compared across algorithms.
    pub fn vertex_sets(&self) -> Vec<Vec<usize>> {
        self.facets.iter().map(|f| f.vertices.clone()).collect()
    }

    /// Id of the first facet whose extensive projection contains `x`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let tol = self.tolerance.max(1e-12) * 10.0;
        self.facets.iter().find_map(|f| {
            let xs: Vec<&[f64]> = self
                .facet_points(f)
                .iter()
                .map(|p| p.x.as_slice())
                .collect();
            let w = barycentric_coordinates(&xs, x, tol).ok()?;
            w.iter().all(|&v| v >= -tol).then_some(f.id)
        })
    }

    /// Value of the derived surface at `x`, if `x` lies inside the projected hull.
    pub fn envelope_energy(&self, x: &[f64]) -> Option<f64> {
        self.locate(x)
            .map(|id| self.facets[id].hyperplane.evaluate(x))
    }
}

fn lifted_from_cloud(cloud: &PointCloud, tol: f64) -> Lifted {
    let coords: Vec<&[f64]> = cloud.points.iter().map(|p| p.x.as_slice()).collect();
    let energy: Vec<f64> = cloud.points.iter().map(|p| p.energy).collect();
    let keys: Vec<usize> = cloud.points.iter().map(|p| p.index).collect();
    Lifted::new(&coords, &energy, &keys, tol)
}

fn check_input(cloud: &PointCloud, opts: &HullOptions) -> Result<()> {
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if cloud.work_dims() > opts.dimension_cap.min(DIMENSION_CAP) {
        return Err(Error::DimensionTooHigh {
            work: cloud.work_dims(),
            cap: opts.dimension_cap.min(DIMENSION_CAP),
        });
    }
    cloud.validate()?;
    if cloud.len() < cloud.work_dims() + 1 {
        return Err(Error::DegenerateInput(format!(
            "{} points cannot span {} extensive dimensions",
            cloud.len(),
            cloud.work_dims()
        )));
    }
    Ok(())
}

/// Lower convex hull with respect to the energy axis.
pub fn lower_convex_hull(cloud: &PointCloud, tolerance: f64) -> Result<LowerHull> {
    lower_convex_hull_with(
        cloud,
        &HullOptions {
            tolerance,
            ..HullOptions::default()
        },
    )
}

pub fn lower_convex_hull_with(cloud: &PointCloud, opts: &HullOptions) -> Result<LowerHull> {
    check_input(cloud, opts)?;
    let lifted = lifted_from_cloud(cloud, opts.tolerance);
    let facets = incremental::lower_facets(&lifted, opts.tolerance)?;
    let sets = facets
        .into_iter()
        .map(|f| f.into_iter().map(|pos| cloud.points[pos].index).collect())
        .collect();
    LowerHull::from_vertex_sets(cloud.clone(), sets, opts.tolerance)
}

/// Exhaustive test oracle: every `d`-subset whose plane supports the cloud
/// from below, under the same perturbation rule as [`lower_convex_hull`].
pub fn naive_hull_oracle(cloud: &PointCloud, tolerance: f64) -> Result<LowerHull> {
    if cloud.len() > ORACLE_POINT_LIMIT {
        return Err(Error::TooLargeForOracle {
            points: cloud.len(),
            limit: ORACLE_POINT_LIMIT,
        });
    }
    check_input(
        cloud,
        &HullOptions {
            tolerance,
            ..HullOptions::default()
        },
    )?;
    let lifted = lifted_from_cloud(cloud, tolerance);
    let d = cloud.work_dims() + 1;
    let n = cloud.len();
    let mut sets = Vec::new();
    let mut rows = Vec::with_capacity(d + 1);
    for_each_combination(n, d, |subset| {
        let up = lifted.vertical_sign(subset);
        if up == 0 {
            return;
        }
        let supports = (0..n).filter(|q| !subset.contains(q)).all(|q| {
            rows.clear();
            rows.extend_from_slice(subset);
            rows.push(q);
            lifted.orient(&rows) == up
        });
        if supports {
            sets.push(subset.iter().map(|&p| cloud.points[p].index).collect());
        }
    });
    if sets.is_empty() {
        return Err(Error::DegenerateInput("no supporting simplex found".into()));
    }
    LowerHull::from_vertex_sets(cloud.clone(), sets, tolerance)
}

fn lifted_from_points(points: &[Vec<f64>], tol: f64) -> Result<Lifted> {
    let d = points.first().map_or(0, |p| p.len());
    if d == 0
        || points
            .iter()
            .any(|p| p.len() != d || p.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidArgument(
            "points must share a positive dimension and be finite".into(),
        ));
    }
    if points.len() < d + 1 {
        return Err(Error::DegenerateInput(format!(
            "{} points cannot span {d} dimensions",
            points.len()
        )));
    }
    let coords: Vec<&[f64]> = points.iter().map(|p| &p[..d - 1]).collect();
    let energy: Vec<f64> = points.iter().map(|p| p[d - 1]).collect();
    let keys: Vec<usize> = (0..points.len()).collect();
    Ok(Lifted::new(&coords, &energy, &keys, tol))
}

/// Facets of the full convex hull of `points` in `R^d` as sorted position sets.
pub fn convex_hull(points: &[Vec<f64>], tolerance: f64) -> Result<Vec<Vec<usize>>> {
    let lifted = lifted_from_points(points, tolerance)?;
    let mut facets = incremental::full_facets(&lifted, tolerance)?;
    for f in &mut facets {
        f.sort_unstable();
    }
    facets.sort();
    Ok(facets)
}

/// Brute-force counterpart of [`convex_hull`] over all `d`-subsets.
pub fn naive_convex_hull(points: &[Vec<f64>], tolerance: f64) -> Result<Vec<Vec<usize>>> {
    if points.len() > ORACLE_POINT_LIMIT {
        return Err(Error::TooLargeForOracle {
            points: points.len(),
            limit: ORACLE_POINT_LIMIT,
        });
    }
    let lifted = lifted_from_points(points, tolerance)?;
    let d = points[0].len();
    let n = points.len();
    let mut facets = Vec::new();
    let mut rows = Vec::with_capacity(d + 1);
    for_each_combination(n, d, |subset| {
        let mut side = 0i8;
        for q in (0..n).filter(|q| !subset.contains(q)) {
            rows.clear();
            rows.extend_from_slice(subset);
            rows.push(q);
            let s = lifted.orient(&rows);
            if s == 0 || (side != 0 && s != side) {
                return;
            }
            side = s;
        }
        facets.push(subset.to_vec());
    });
    Ok(facets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud_1d(samples: &[(f64, f64)]) -> PointCloud {
        PointCloud::from_samples(
            vec![AxisDescriptor::extensive("X")],
            samples.iter().map(|&(x, e)| ("a", vec![x], e)),
        )
        .unwrap()
    }

    #[test]
    fn convex_parabola_uses_every_sample() {
        let cloud = cloud_1d(&[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]);
        let hull = lower_convex_hull(&cloud, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(hull.vertex_sets(), vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(hull.hull_vertices, vec![0, 1, 2]);
        assert!(hull.metastable.is_empty());
        assert_eq!(hull.facets[0].neighbors, vec![1]);
    }

    #[test]
    fn interior_point_is_metastable() {
        let cloud = cloud_1d(&[(0.0, 0.0), (1.0, 5.0), (2.0, 0.0)]);
        let hull = lower_convex_hull(&cloud, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(hull.vertex_sets(), vec![vec![0, 2]]);
        assert_eq!(hull.metastable, vec![1]);
    }

    #[test]
    fn single_triangle() {
        let cloud = PointCloud::from_samples(
            vec![
                AxisDescriptor::extensive("a"),
                AxisDescriptor::extensive("b"),
            ],
            [
                ("p", vec![0.0, 0.0], 1.0),
                ("p", vec![1.0, 0.0], 0.0),
                ("p", vec![0.0, 1.0], 2.0),
            ],
        )
        .unwrap();
        let hull = lower_convex_hull(&cloud, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(hull.vertex_sets(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn zero_dimensional_cloud_keeps_the_lowest_point() {
        let cloud = PointCloud::from_samples(
            vec![],
            [("a", vec![], 1.0), ("b", vec![], -2.0), ("c", vec![], 0.5)],
        )
        .unwrap();
        let hull = lower_convex_hull(&cloud, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(hull.vertex_sets(), vec![vec![1]]);
        assert_eq!(
            naive_hull_oracle(&cloud, DEFAULT_TOLERANCE)
                .unwrap()
                .vertex_sets(),
            vec![vec![1]]
        );
    }

    #[test]
    fn collinear_cloud_is_degenerate() {
        let cloud = PointCloud::from_samples(
            vec![
                AxisDescriptor::extensive("a"),
                AxisDescriptor::extensive("b"),
            ],
            [
                ("p", vec![0.0, 0.0], 1.0),
                ("p", vec![1.0, 1.0], 0.0),
                ("p", vec![2.0, 2.0], 2.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            lower_convex_hull(&cloud, DEFAULT_TOLERANCE),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let vars = (0..9)
            .map(|i| AxisDescriptor::extensive(format!("x{i}")))
            .collect();
        let cloud =
            PointCloud::from_samples(vars, (0..10).map(|i| ("p", vec![i as f64; 9], 0.0))).unwrap();
        assert!(matches!(
            lower_convex_hull(&cloud, DEFAULT_TOLERANCE),
            Err(Error::DimensionTooHigh { work: 9, cap: 8 })
        ));
    }

    #[test]
    fn oracle_guard() {
        let cloud = cloud_1d(
            &(0..61)
                .map(|i| (i as f64, (i * i) as f64))
                .collect::<Vec<_>>(),
        );
        assert!(matches!(
            naive_hull_oracle(&cloud, DEFAULT_TOLERANCE),
            Err(Error::TooLargeForOracle { points: 61, .. })
        ));
    }

    #[test]
    fn tetrahedron_full_hull() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.1, 0.1, 0.1],
        ];
        let f = convex_hull(&pts, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(
            f,
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
        assert_eq!(naive_convex_hull(&pts, DEFAULT_TOLERANCE).unwrap(), f);
    }
}
