//! Face counting for simplicial complexes and the classical identities and
//! bounds on f-vectors.

mod cyclic;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::LowerHull;

pub use cyclic::{cyclic_facets, cyclic_fvector, moment_curve};

/// Face counts `(f_0, ..., f_{d-1})`; `f_{-1} = 1` is implied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FVector {
    pub d: usize,
    pub counts: Vec<u64>,
}

impl FVector {
    pub fn new(counts: Vec<u64>) -> Self {
        FVector {
            d: counts.len(),
            counts,
        }
    }

    /// `f_k` for `-1 <= k <= d`, with `f_{-1} = f_d = 1`.
    pub fn get(&self, k: i64) -> u64 {
        if k == -1 || k == self.d as i64 {
            1
        } else if k < -1 || k > self.d as i64 {
            0
        } else {
            self.counts[k as usize]
        }
    }

    /// The f-vector without its last entry, e.g. a simplex's boundary complex.
    pub fn boundary(&self) -> FVector {
        FVector::new(self.counts[..self.d.saturating_sub(1)].to_vec())
    }
}

impl std::fmt::Display for FVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Calls `f` with every increasing `k`-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Face counts of a `k`-simplex, including the simplex itself as `f_k = 1`.
pub fn simplex_fvector(k: usize) -> Result<FVector> {
    if k > 20 {
        return Err(Error::InvalidArgument(format!(
            "simplex dimension {k} exceeds 20"
        )));
    }
    Ok(FVector::new(
        (0..=k as u64)
            .map(|j| binomial(k as u64 + 1, j + 1))
            .collect(),
    ))
}

/// Counts distinct faces of the pure complex generated by `facets`, each a
/// set of `d` vertex labels.
pub fn fvector_of_complex(facets: &[Vec<usize>], d: usize) -> FVector {
    let mut levels: Vec<HashSet<Vec<usize>>> = vec![HashSet::new(); d];
    let mut sub = Vec::with_capacity(d);
    for facet in facets {
        let mut f = facet.clone();
        f.sort_unstable();
        let m = f.len().min(d);
        for mask in 1u32..(1u32 << m) {
            sub.clear();
            sub.extend((0..m).filter(|&i| mask & (1 << i) != 0).map(|i| f[i]));
            levels[sub.len() - 1].insert(sub.clone());
        }
    }
    FVector::new(levels.iter().map(|l| l.len() as u64).collect())
}

/// Face counts of the derived surface as a `(d-1)`-dimensional complex.
pub fn fvector_of_hull(hull: &LowerHull) -> FVector {
    fvector_of_complex(&hull.vertex_sets(), hull.work_dims() + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub k: i64,
    pub lhs: i64,
    pub rhs: i64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DehnSommervilleReport {
    pub checks: Vec<IdentityCheck>,
}

impl DehnSommervilleReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// The `k = -1` case, which is the Euler relation.
    pub fn euler(&self) -> &IdentityCheck {
        &self.checks[0]
    }

    pub fn failing(&self) -> Vec<i64> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.k)
            .collect()
    }
}

/// Evaluates `sum_{j=k}^{d-1} (-1)^j C(j+1, k+1) f_j = (-1)^(d-1) f_k` for
/// `k = -1, ..., d-1`.
pub fn dehn_somerville_check(f: &FVector) -> DehnSommervilleReport {
    let d = f.d as i64;
    let parity = |e: i64| if e.rem_euclid(2) == 0 { 1i64 } else { -1 };
    let checks = (-1..d)
        .map(|k| {
            let lhs: i64 = (k..d)
                .map(|j| {
                    parity(j) * binomial((j + 1) as u64, (k + 1) as u64) as i64 * f.get(j) as i64
                })
                .sum();
            let rhs = parity(d - 1) * f.get(k) as i64;
            IdentityCheck {
                k,
                lhs,
                rhs,
                pass: lhs == rhs,
            }
        })
        .collect();
    DehnSommervilleReport { checks }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub k: usize,
    pub value: u64,
    pub bound: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UbtReport {
    pub cyclic: FVector,
    pub checks: Vec<BoundCheck>,
}

impl UbtReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn attains_bound(&self) -> bool {
        self.checks.iter().all(|c| c.value == c.bound)
    }
}

/// Compares `f` entrywise against the cyclic polytope with `n` vertices.
pub fn ubt_check(f: &FVector, n: usize) -> Result<UbtReport> {
    if f.counts.first().copied() != Some(n as u64) {
        return Err(Error::InvalidArgument(format!("f_0 must equal n = {n}")));
    }
    let cyclic = cyclic_fvector(n, f.d)?;
    let checks = f
        .counts
        .iter()
        .zip(&cyclic.counts)
        .enumerate()
        .map(|(k, (&value, &bound))| BoundCheck {
            k,
            value,
            bound,
            pass: value <= bound,
        })
        .collect();
    Ok(UbtReport { cyclic, checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Below,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "class", content = "side")]
pub enum TernaryClass {
    Minimal,
    Maximal,
    Interior,
    Violation(BoundSide),
}

impl std::fmt::Display for TernaryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TernaryClass::Minimal => write!(f, "minimal"),
            TernaryClass::Maximal => write!(f, "maximal"),
            TernaryClass::Interior => write!(f, "interior"),
            TernaryClass::Violation(BoundSide::Below) => write!(f, "violation (below f0 - 2)"),
            TernaryClass::Violation(BoundSide::Above) => write!(f, "violation (above 2 f0 - 4)"),
        }
    }
}

/// Position of a ternary diagram's triangle count in `[f0 - 2, 2 f0 - 4]`.
pub fn ternary_bounds(f0: u64, f2: u64) -> Result<TernaryClass> {
    if f0 < 3 {
        return Err(Error::InvalidArgument(format!(
            "a ternary diagram needs f0 >= 3, got {f0}"
        )));
    }
    let (lo, hi) = (f0 - 2, 2 * f0 - 4);
    Ok(if f2 < lo {
        TernaryClass::Violation(BoundSide::Below)
    } else if f2 > hi {
        TernaryClass::Violation(BoundSide::Above)
    } else if f2 == lo {
        TernaryClass::Minimal
    } else if f2 == hi {
        TernaryClass::Maximal
    } else {
        TernaryClass::Interior
    })
}
