//! Beneath-beyond convex hull over a [`Lifted`] configuration.
//!
//! Facets are stored as oriented vertex tuples: `orient(facet ++ [q]) > 0`
//! means `q` lies beyond the facet. Replacing the vertex of a visible facet
//! that is opposite a horizon ridge by the new point keeps that orientation,
//! so no predicate call is needed to orient new facets.

use std::collections::HashMap;

use super::predicate::{Lifted, TOP};
use crate::error::{Error, Result};

struct FacetRec {
    verts: Vec<usize>,
    /// `neighbors[k]` shares every vertex of this facet except `verts[k]`.
    neighbors: Vec<usize>,
    /// Single-vertex facets cannot be reoriented by swapping, so orientation
    /// is carried as a flag instead.
    flip: bool,
    alive: bool,
}

pub(crate) struct Engine<'a> {
    lifted: &'a Lifted,
    facets: Vec<FacetRec>,
    visit_mark: Vec<u32>,
    epoch: u32,
    scratch: Vec<usize>,
}

impl<'a> Engine<'a> {
    fn orient_with(&mut self, facet: usize, q: usize) -> i8 {
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.facets[facet].verts);
        self.scratch.push(q);
        let s = self.lifted.orient(&self.scratch);
        if self.facets[facet].flip {
            -s
        } else {
            s
        }
    }

    /// Builds the initial simplex from `simplex` (length `w + 2`).
    fn new(lifted: &'a Lifted, simplex: &[usize]) -> Result<Self> {
        let n = simplex.len();
        let mut engine = Engine {
            lifted,
            facets: Vec::new(),
            visit_mark: Vec::new(),
            epoch: 0,
            scratch: Vec::with_capacity(n),
        };
        for skip in 0..n {
            let verts: Vec<usize> = simplex
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            let mut probe = verts.clone();
            probe.push(simplex[skip]);
            let flip = match lifted.orient(&probe) {
                0 => return Err(Error::DegenerateInput("initial simplex is flat".into())),
                s => s > 0,
            };
            engine.facets.push(FacetRec {
                verts,
                neighbors: Vec::new(),
                flip,
                alive: true,
            });
        }
        // Facet `i` omits simplex vertex `i`; its neighbor opposite vertex `v`
        // is the facet that omits `v`.
        for i in 0..n {
            let neighbors = engine.facets[i]
                .verts
                .iter()
                .map(|v| {
                    simplex
                        .iter()
                        .position(|s| s == v)
                        .expect("vertex in simplex")
                })
                .collect();
            engine.facets[i].neighbors = neighbors;
        }
        Ok(engine)
    }

    fn insert(&mut self, q: usize) -> Result<bool> {
        let Some(start) =
            (0..self.facets.len()).find(|&f| self.facets[f].alive && self.orient_with(f, q) > 0)
        else {
            return Ok(false);
        };

        self.epoch = self.epoch.wrapping_add(1);
        if self.visit_mark.len() < self.facets.len() {
            self.visit_mark.resize(self.facets.len(), 0);
        }
        // mark = epoch for visible, epoch | high bit for tested hidden
        let hidden = self.epoch | 0x8000_0000;
        self.visit_mark[start] = self.epoch;
        let mut visible = vec![start];
        let mut stack = vec![start];
        while let Some(f) = stack.pop() {
            for k in 0..self.facets[f].neighbors.len() {
                let g = self.facets[f].neighbors[k];
                let mark = self.visit_mark[g];
                if mark == self.epoch || mark == hidden {
                    continue;
                }
                if self.orient_with(g, q) > 0 {
                    self.visit_mark[g] = self.epoch;
                    visible.push(g);
                    stack.push(g);
                } else {
                    self.visit_mark[g] = hidden;
                }
            }
        }
        visible.sort_unstable();

        let mut created = Vec::new();
        for &f in &visible {
            for k in 0..self.facets[f].verts.len() {
                let g = self.facets[f].neighbors[k];
                if self.visit_mark[g] == self.epoch {
                    continue;
                }
                let mut verts = self.facets[f].verts.clone();
                verts[k] = q;
                let flip = self.facets[f].flip;
                let id = self.facets.len();
                let mut neighbors = vec![usize::MAX; verts.len()];
                neighbors[k] = g;
                let back = self.facets[g]
                    .neighbors
                    .iter()
                    .position(|&h| h == f)
                    .ok_or_else(|| {
                        Error::NumericalDegeneracy("asymmetric facet adjacency".into())
                    })?;
                self.facets[g].neighbors[back] = id;
                self.facets.push(FacetRec {
                    verts,
                    neighbors,
                    flip,
                    alive: true,
                });
                created.push(id);
            }
        }
        for &f in &visible {
            self.facets[f].alive = false;
        }

        // Link new facets to each other across ridges through `q`.
        let mut open: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for &id in &created {
            for j in 0..self.facets[id].verts.len() {
                if self.facets[id].verts[j] == q {
                    continue;
                }
                let mut ridge: Vec<usize> = self.facets[id]
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &v)| v)
                    .collect();
                ridge.sort_unstable();
                match open.remove(&ridge) {
                    Some((other, oj)) => {
                        self.facets[id].neighbors[j] = other;
                        self.facets[other].neighbors[oj] = id;
                    }
                    None => {
                        open.insert(ridge, (id, j));
                    }
                }
            }
        }
        if !open.is_empty() {
            return Err(Error::NumericalDegeneracy(format!(
                "horizon of point {q} is not a closed ridge cycle"
            )));
        }
        Ok(true)
    }

    fn alive_facets(&self) -> impl Iterator<Item = &FacetRec> {
        self.facets.iter().filter(|f| f.alive)
    }
}

/// Greedy selection of `count` affinely independent rows, preferring the row
/// farthest from the span chosen so far. `rows(i)` yields coordinates.
fn independent_rows(
    n: usize,
    count: usize,
    rows: impl Fn(usize) -> Vec<f64>,
    tol: f64,
) -> Option<Vec<usize>> {
    if n == 0 || count == 0 {
        return (count == 0).then(Vec::new);
    }
    let origin = rows(0);
    let mut chosen = vec![0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while chosen.len() < count {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for i in 0..n {
            if chosen.contains(&i) {
                continue;
            }
            let mut v: Vec<f64> = rows(i).iter().zip(&origin).map(|(a, b)| a - b).collect();
            for b in &basis {
                let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
            let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(_, l, _)| len > *l) {
                best = Some((i, len, v));
            }
        }
        let (i, len, v) = best?;
        if len <= tol.sqrt() {
            return None;
        }
        basis.push(v.into_iter().map(|x| x / len).collect());
        chosen.push(i);
    }
    Some(chosen)
}

/// Facets of the lower envelope (energy axis down) as position tuples.
///
/// Vertical facets over the boundary of the extensive projection also avoid
/// `TOP`; they are recognized by a flat projection and dropped.
pub(crate) fn lower_facets(lifted: &Lifted, tol: f64) -> Result<Vec<Vec<usize>>> {
    let w = lifted.work_dims();
    let n = lifted.len();
    let simplex_rows =
        independent_rows(n, w + 1, |i| lifted.coords(i).to_vec(), tol).ok_or_else(|| {
            Error::DegenerateInput(format!(
                "extensive coordinates span fewer than {w} dimensions"
            ))
        })?;
    let mut simplex = simplex_rows.clone();
    simplex.push(TOP);
    let mut engine = Engine::new(lifted, &simplex)?;
    for q in 0..n {
        if !simplex_rows.contains(&q) {
            engine.insert(q)?;
        }
    }
    Ok(engine
        .alive_facets()
        .filter(|f| !f.verts.contains(&TOP) && lifted.vertical_sign(&f.verts) != 0)
        .map(|f| f.verts.clone())
        .collect())
}

/// Facets of the full convex hull of points in `R^(w+1)`, where the lifted
/// energy plays the role of the last coordinate.
pub(crate) fn full_facets(lifted: &Lifted, tol: f64) -> Result<Vec<Vec<usize>>> {
    let d = lifted.work_dims() + 1;
    let n = lifted.len();
    let simplex = independent_rows(n, d + 1, |i| lifted.row(i), tol)
        .ok_or_else(|| Error::DegenerateInput(format!("points span fewer than {d} dimensions")))?;
    let mut engine = Engine::new(lifted, &simplex)?;
    for q in 0..n {
        if !simplex.contains(&q) {
            engine.insert(q)?;
        }
    }
    Ok(engine.alive_facets().map(|f| f.verts.clone()).collect())
}
