//! Random and constructive test data: point clouds, ternary compound
//! datasets and ternary triangulations with known face counts.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::Result;
use crate::hull::{facet_hyperplane, AxisDescriptor, PointCloud};
use crate::io::CompoundEntry;

/// `n` points with coordinates in `[0, 1)^w` and energies in `[-1, 1)`,
/// assigned round-robin to `phases` labels.
pub fn random_cloud<R: Rng>(rng: &mut R, n: usize, w: usize, phases: usize) -> Result<PointCloud> {
    let variables = (0..w)
        .map(|k| AxisDescriptor::extensive(format!("X{}", k + 1)))
        .collect();
    let samples = (0..n).map(|i| {
        let x = (0..w).map(|_| rng.gen::<f64>()).collect();
        (
            format!("p{}", i % phases.max(1)),
            x,
            rng.gen_range(-1.0..1.0),
        )
    });
    PointCloud::from_samples(variables, samples.collect::<Vec<_>>())
}

/// Cloud on the integer grid `{0..side}^w` with integer energies, which
/// produces many coplanar and cospherical configurations.
pub fn random_grid_cloud<R: Rng>(rng: &mut R, n: usize, w: usize, side: u32) -> Result<PointCloud> {
    let variables = (0..w)
        .map(|k| AxisDescriptor::extensive(format!("X{}", k + 1)))
        .collect();
    let samples = (0..n).map(|_| {
        let x = (0..w).map(|_| f64::from(rng.gen_range(0..=side))).collect();
        ("grid", x, f64::from(rng.gen_range(-3i32..=3)))
    });
    PointCloud::from_samples(variables, samples.collect::<Vec<_>>())
}

pub const TERNARY_ELEMENTS: [&str; 3] = ["A", "B", "C"];

/// Three elemental references at energy 0 plus `compounds` entries with
/// integer counts in `0..=4` (at least two elements present) and formation
/// energies in `[-1, 0)`.
pub fn random_ternary_dataset<R: Rng>(rng: &mut R, compounds: usize) -> Vec<CompoundEntry> {
    let mut entries: Vec<CompoundEntry> = TERNARY_ELEMENTS
        .iter()
        .map(|el| CompoundEntry {
            id: el.to_string(),
            composition: BTreeMap::from([(el.to_string(), 1.0)]),
            energy: 0.0,
        })
        .collect();
    while entries.len() < compounds + 3 {
        let counts: Vec<u32> = (0..3).map(|_| rng.gen_range(0..=4)).collect();
        if counts.iter().filter(|&&c| c > 0).count() < 2 {
            continue;
        }
        let composition: BTreeMap<String, f64> = TERNARY_ELEMENTS
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| c > 0)
            .map(|(el, &c)| (el.to_string(), f64::from(c)))
            .collect();
        let id = TERNARY_ELEMENTS
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| c > 0)
            .map(|(el, &c)| {
                if c == 1 {
                    el.to_string()
                } else {
                    format!("{el}{c}")
                }
            })
            .collect::<String>();
        entries.push(CompoundEntry {
            id: format!("{id}-{}", entries.len()),
            composition,
            energy: -rng.gen_range(0.01..1.0),
        });
    }
    entries
}

/// Sides of the composition triangle: `x1 = 0`, `x2 = 0`, `x1 + x2 = 1`.
const SIDES: [u8; 3] = [1, 2, 4];

/// Triangulation of the composition triangle grown by vertex insertion, with
/// heights chosen so that the lower hull of the lifted vertices is exactly
/// the triangulation. Asserts `f2 = 2 f0 - b - 2` after every step, where
/// `b` counts boundary vertices.
#[derive(Debug, Clone)]
pub struct SplitTriangulation {
    pub positions: Vec<[f64; 2]>,
    pub heights: Vec<f64>,
    pub triangles: Vec<[usize; 3]>,
    sides: Vec<u8>,
}

impl Default for SplitTriangulation {
    fn default() -> Self {
        Self::new()
    }
}

impl SplitTriangulation {
    /// The bare triangle of three elemental references at height 0.
    pub fn new() -> Self {
        SplitTriangulation {
            positions: vec![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
            heights: vec![0.0; 3],
            triangles: vec![[0, 1, 2]],
            sides: vec![
                SIDES[1] | SIDES[2],
                SIDES[0] | SIDES[2],
                SIDES[0] | SIDES[1],
            ],
        }
    }

    pub fn f0(&self) -> usize {
        self.positions.len()
    }

    pub fn f2(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_vertices(&self) -> usize {
        self.sides.iter().filter(|&&s| s != 0).count()
    }

    /// Boundary edges of triangle `t` as positions `(i, j)` within it.
    pub fn boundary_edges(&self, t: usize) -> Vec<(usize, usize)> {
        let tri = self.triangles[t];
        [(0, 1), (1, 2), (0, 2)]
            .into_iter()
            .filter(|&(i, j)| self.sides[tri[i]] & self.sides[tri[j]] != 0)
            .collect()
    }

    fn plane(&self, t: usize) -> crate::hull::Hyperplane {
        let tri = self.triangles[t];
        let xs: Vec<[f64; 2]> = tri.iter().map(|&v| self.positions[v]).collect();
        let hs: Vec<f64> = tri.iter().map(|&v| self.heights[v]).collect();
        facet_hyperplane(&xs, &hs).expect("triangles are non-degenerate")
    }

    /// Height just below the plane of `t` at `p` and above every other plane.
    fn height_below(&self, t: usize, p: [f64; 2]) -> f64 {
        let own = self.plane(t).evaluate(&p);
        let margin = (0..self.f2())
            .filter(|&s| s != t)
            .map(|s| own - self.plane(s).evaluate(&p))
            .fold(2.0, f64::min);
        own - 0.5 * margin
    }

    fn push_vertex(&mut self, p: [f64; 2], h: f64, sides: u8) -> usize {
        self.positions.push(p);
        self.heights.push(h);
        self.sides.push(sides);
        self.positions.len() - 1
    }

    fn check(&self) {
        let (f0, b) = (self.f0(), self.boundary_vertices());
        assert_eq!(
            self.f2() + b + 2,
            2 * f0,
            "triangulation face count invariant"
        );
    }

    /// Inserts a vertex at barycentric `weights` inside triangle `t`, replacing
    /// it by three triangles.
    pub fn split_interior(&mut self, t: usize, weights: [f64; 3]) {
        let tri = self.triangles[t];
        let total: f64 = weights.iter().sum();
        let mut p = [0.0; 2];
        for (k, &v) in tri.iter().enumerate() {
            p[0] += weights[k] / total * self.positions[v][0];
            p[1] += weights[k] / total * self.positions[v][1];
        }
        let h = self.height_below(t, p);
        let n = self.push_vertex(p, h, 0);
        self.triangles[t] = [tri[0], tri[1], n];
        self.triangles.push([tri[1], tri[2], n]);
        self.triangles.push([tri[0], tri[2], n]);
        self.check();
    }

    /// Inserts a vertex at fraction `s` along boundary edge `edge` of
    /// triangle `t`, replacing it by two triangles.
    pub fn split_boundary_edge(&mut self, t: usize, edge: (usize, usize), s: f64) {
        let tri = self.triangles[t];
        let (a, b) = (tri[edge.0], tri[edge.1]);
        let opposite = tri[3 - edge.0 - edge.1];
        let side = self.sides[a] & self.sides[b];
        assert!(side != 0, "edge is not on the boundary");
        let (pa, pb) = (self.positions[a], self.positions[b]);
        let mut p = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
        if side & SIDES[0] != 0 {
            p[0] = 0.0;
        }
        if side & SIDES[1] != 0 {
            p[1] = 0.0;
        }
        if side & SIDES[2] != 0 {
            p[1] = 1.0 - p[0];
        }
        let h = self.height_below(t, p);
        let n = self.push_vertex(p, h, side);
        self.triangles[t] = [a, n, opposite];
        self.triangles.push([n, b, opposite]);
        self.check();
    }

    /// Applies `steps` random splits; `boundary_share` is the probability of
    /// choosing a boundary-edge split when one is available.
    pub fn random<R: Rng>(rng: &mut R, steps: usize, boundary_share: f64) -> Self {
        let mut tri = SplitTriangulation::new();
        for _ in 0..steps {
            let t = rng.gen_range(0..tri.f2());
            let edges = tri.boundary_edges(t);
            if !edges.is_empty() && rng.gen_bool(boundary_share) {
                let e = edges[rng.gen_range(0..edges.len())];
                tri.split_boundary_edge(t, e, rng.gen_range(0.3..0.7));
            } else {
                let w = [
                    rng.gen_range(0.2..0.8),
                    rng.gen_range(0.2..0.8),
                    rng.gen_range(0.2..0.8),
                ];
                tri.split_interior(t, w);
            }
        }
        tri
    }

    /// Lifted vertices as a ternary cloud over `(x1, x2)`.
    pub fn to_cloud(&self) -> Result<PointCloud> {
        let variables = vec![
            AxisDescriptor::extensive("x1"),
            AxisDescriptor::extensive("x2"),
        ];
        let samples = self
            .positions
            .iter()
            .zip(&self.heights)
            .enumerate()
            .map(|(i, (p, &h))| (format!("v{i}"), p.to_vec(), h));
        PointCloud::from_samples(variables, samples.collect::<Vec<_>>())
    }

    /// Triangles as sorted vertex-index triples in sorted order.
    pub fn vertex_sets(&self) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = self
            .triangles
            .iter()
            .map(|t| {
                let mut v = t.to_vec();
                v.sort_unstable();
                v
            })
            .collect();
        sets.sort();
        sets
    }
}
