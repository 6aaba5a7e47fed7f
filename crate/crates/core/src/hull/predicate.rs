//! Orientation predicate over lifted points with symbolic perturbation.
//!
//! Every point is a row `(x, 1, u)` of a homogeneous matrix, with coordinates
//! normalized to the cloud's bounding box. Exact coplanarities are broken by
//! raising each energy by an infinitesimal `eps^(k+1)`, where `k` is the rank
//! of the point index, so lower indices are pushed up the most. An extra
//! vertex `TOP` sits at `(c, h)` with `h` larger than any finite quantity;
//! facets of `hull(P + TOP)` that avoid `TOP` are exactly the lower facets.
//!
//! The determinant is linear in every energy entry, so with
//! `det = h * C_top + D0 + sum(delta_r * C_r)` its sign is read from the first
//! of `C_top`, `D0`, `C_r` (ascending index) that is not zero within tolerance.

use crate::linalg::{det_in_place, spread_scale};

pub(crate) const TOP: usize = usize::MAX;

pub(crate) struct Lifted {
    w: usize,
    x: Vec<f64>,
    u: Vec<f64>,
    /// Rank of each position in ascending perturbation-key order.
    rank: Vec<usize>,
    top: Vec<f64>,
    tol: f64,
}

impl Lifted {
    /// `coords` are `n` rows of `w` extensive values, `energy` the lifting
    /// coordinate, `keys` the stable identities that order the perturbation.
    pub(crate) fn new(coords: &[&[f64]], energy: &[f64], keys: &[usize], tol: f64) -> Self {
        let n = energy.len();
        let w = coords.first().map_or(0, |c| c.len());
        let mut lo = vec![f64::INFINITY; w];
        let mut hi = vec![f64::NEG_INFINITY; w];
        for c in coords {
            for k in 0..w {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        let span: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| if h > l { h - l } else { 1.0 })
            .collect();
        let (ulo, uhi) = energy
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &e| {
                (l.min(e), h.max(e))
            });
        let uspan = if uhi > ulo { uhi - ulo } else { 1.0 };

        let mut x = Vec::with_capacity(n * w);
        for c in coords {
            for k in 0..w {
                x.push((c[k] - lo[k]) / span[k]);
            }
        }
        let u: Vec<f64> = energy.iter().map(|e| (e - ulo) / uspan).collect();

        // A strictly positive, non-uniform weighting keeps the reference point
        // in the relative interior while avoiding symmetric grid lines.
        const GOLDEN: f64 = 0.618_033_988_749_894_8;
        let mut top = vec![0.0; w];
        let mut total = 0.0;
        for i in 0..n {
            let wt = 1.0 + ((i as f64 + 1.0) * GOLDEN).fract();
            total += wt;
            for k in 0..w {
                top[k] += wt * x[i * w + k];
            }
        }
        if total > 0.0 {
            top.iter_mut().for_each(|t| *t /= total);
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| keys[i]);
        let mut rank = vec![0; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        Lifted {
            w,
            x,
            u,
            rank,
            top,
            tol,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.u.len()
    }

    pub(crate) fn work_dims(&self) -> usize {
        self.w
    }

    pub(crate) fn coords(&self, v: usize) -> &[f64] {
        if v == TOP {
            &self.top
        } else {
            &self.x[v * self.w..(v + 1) * self.w]
        }
    }

    /// Normalized `(x, u)` coordinates of a real point.
    pub(crate) fn row(&self, v: usize) -> Vec<f64> {
        let mut r = self.coords(v).to_vec();
        r.push(self.u[v]);
        r
    }

    fn energy(&self, v: usize) -> f64 {
        if v == TOP {
            0.0
        } else {
            self.u[v]
        }
    }

    fn fill(&self, verts: &[usize], buf: &mut Vec<f64>, unit_row: Option<usize>) {
        buf.clear();
        for (r, &v) in verts.iter().enumerate() {
            buf.extend_from_slice(self.coords(v));
            buf.push(1.0);
            buf.push(match unit_row {
                Some(ur) => {
                    if ur == r {
                        1.0
                    } else {
                        0.0
                    }
                }
                None => self.energy(v),
            });
        }
    }

    fn is_zero(&self, value: f64, scale: f64) -> bool {
        value.abs() <= self.tol * scale
    }

    /// Cofactor of the energy entry in row `r`: the oriented extensive volume
    /// of the other rows, with its own magnitude scale.
    fn energy_cofactor(&self, verts: &[usize], r: usize, buf: &mut Vec<f64>) -> (f64, f64) {
        let n = verts.len();
        self.fill(verts, buf, Some(r));
        let det = det_in_place(buf, n);
        let scale = spread_scale(
            verts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != r)
                .map(|(_, &v)| self.coords(v)),
        );
        (det, scale)
    }

    /// Sign of the leading `h` term when `TOP` is appended to `verts`
    /// (`w + 1` real vertices); zero when their extensive projection is flat.
    pub(crate) fn vertical_sign(&self, verts: &[usize]) -> i8 {
        let mut rows = verts.to_vec();
        rows.push(TOP);
        let mut buf = Vec::with_capacity(rows.len() * rows.len());
        let (c, s) = self.energy_cofactor(&rows, rows.len() - 1, &mut buf);
        if self.is_zero(c, s) {
            0
        } else {
            sign(c)
        }
    }

    /// Sign of the perturbed orientation of `w + 2` vertices: positive, negative
    /// or zero when even the perturbation cannot decide (extensive degeneracy).
    pub(crate) fn orient(&self, verts: &[usize]) -> i8 {
        let n = verts.len();
        debug_assert_eq!(n, self.w + 2);
        let mut buf = Vec::with_capacity(n * n);

        if let Some(t) = verts.iter().position(|&v| v == TOP) {
            let (c, s) = self.energy_cofactor(verts, t, &mut buf);
            if !self.is_zero(c, s) {
                return sign(c);
            }
        }

        self.fill(verts, &mut buf, None);
        let d0 = det_in_place(&mut buf, n);
        let rows: Vec<Vec<f64>> = verts
            .iter()
            .map(|&v| {
                let mut r = self.coords(v).to_vec();
                r.push(self.energy(v));
                r
            })
            .collect();
        let s0 = spread_scale(rows.iter().map(|r| r.as_slice()));
        if !self.is_zero(d0, s0) {
            return sign(d0);
        }

        let mut rows_by_key: Vec<usize> = (0..n).filter(|&r| verts[r] != TOP).collect();
        rows_by_key.sort_by_key(|&r| self.rank[verts[r]]);
        for r in rows_by_key {
            let (c, s) = self.energy_cofactor(verts, r, &mut buf);
            if !self.is_zero(c, s) {
                return sign(c);
            }
        }
        0
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else {
        -1
    }
}
