use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::combinatorics::for_each_combination;
use crate::error::{Error, Result};
use crate::hull::{AxisDescriptor, PointCloud};

/// One compound: atom counts per element and formation energy per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundEntry {
    pub id: String,
    pub composition: BTreeMap<String, f64>,
    pub energy: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DatasetFile {
    Entries(Vec<CompoundEntry>),
    System {
        #[serde(default)]
        elements: Option<Vec<String>>,
        entries: Vec<CompoundEntry>,
    },
}

/// A ternary chemical system as a cloud over `(x_a, x_b)` mole fractions of
/// its first two elements in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemicalSystem {
    pub elements: Vec<String>,
    pub cloud: PointCloud,
    /// Entry id of each cloud point, in cloud order.
    pub entry_ids: Vec<String>,
    pub warnings: Vec<String>,
}

impl ChemicalSystem {
    pub fn name(&self) -> String {
        self.elements.join("-")
    }
}

fn validate_entries(entries: &[CompoundEntry], base: &str) -> Result<()> {
    for (i, e) in entries.iter().enumerate() {
        for (el, &n) in &e.composition {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(Error::validation(
                    format!("{base}/{i}/composition/{el}"),
                    format!("entry `{}` has invalid count {n}", e.id),
                ));
            }
        }
        if e.composition.values().all(|&n| n == 0.0) {
            return Err(Error::validation(
                format!("{base}/{i}/composition"),
                format!("entry `{}` has no atoms", e.id),
            ));
        }
        if !e.energy.is_finite() {
            return Err(Error::validation(
                format!("{base}/{i}/energy"),
                format!("entry `{}` has a non-finite energy", e.id),
            ));
        }
    }
    Ok(())
}

fn elements_of(e: &CompoundEntry) -> BTreeSet<&str> {
    e.composition
        .iter()
        .filter(|(_, &n)| n > 0.0)
        .map(|(k, _)| k.as_str())
        .collect()
}

/// Splits a dataset into every ternary system it spans.
pub fn parse_compound_dataset(text: &str) -> Result<Vec<ChemicalSystem>> {
    let (declared, entries, base) = match serde_json::from_str::<DatasetFile>(text)? {
        DatasetFile::Entries(entries) => (None, entries, ""),
        DatasetFile::System { elements, entries } => (elements, entries, "/entries"),
    };
    validate_entries(&entries, base)?;
    let mut elements: BTreeSet<String> = entries
        .iter()
        .flat_map(|e| elements_of(e).into_iter().map(String::from))
        .collect();
    if let Some(d) = declared {
        elements.extend(d);
    }
    let elements: Vec<String> = elements.into_iter().collect();
    if elements.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a ternary system needs 3 elements, found {}",
            elements.len()
        )));
    }
    let mut systems = Vec::new();
    let mut failure = None;
    for_each_combination(elements.len(), 3, |c| {
        if failure.is_some() {
            return;
        }
        let sys: Vec<String> = c.iter().map(|&i| elements[i].clone()).collect();
        match build_system(&sys, &entries) {
            Ok(s) => systems.push(s),
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(systems),
    }
}

pub fn import_compound_dataset(path: impl AsRef<Path>) -> Result<Vec<ChemicalSystem>> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    parse_compound_dataset(&text)
}

fn build_system(sys: &[String], entries: &[CompoundEntry]) -> Result<ChemicalSystem> {
    let allowed: BTreeSet<&str> = sys.iter().map(String::as_str).collect();
    // composition key -> (entry position, fractions)
    let mut kept: BTreeMap<Vec<i64>, (usize, Vec<f64>)> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (pos, e) in entries.iter().enumerate() {
        if !elements_of(e).is_subset(&allowed) {
            continue;
        }
        let total: f64 = sys
            .iter()
            .map(|el| e.composition.get(el).copied().unwrap_or(0.0))
            .sum();
        let frac: Vec<f64> = sys
            .iter()
            .map(|el| e.composition.get(el).copied().unwrap_or(0.0) / total)
            .collect();
        let key: Vec<i64> = frac.iter().map(|f| (f * 1e12).round() as i64).collect();
        match kept.get(&key) {
            Some(&(other, _)) => {
                let (keep, drop) = if e.energy < entries[other].energy {
                    (pos, other)
                } else {
                    (other, pos)
                };
                warnings.push(format!(
                    "duplicate composition: kept `{}`, dropped `{}`",
                    entries[keep].id, entries[drop].id
                ));
                kept.insert(key, (keep, frac));
            }
            None => {
                kept.insert(key, (pos, frac));
            }
        }
    }
    for (k, el) in sys.iter().enumerate() {
        let pure = kept.values().find(|(_, f)| f[k] == 1.0);
        match pure {
            None => return Err(Error::MissingElementalReference(el.clone())),
            Some(&(pos, _)) if entries[pos].energy != 0.0 => warnings.push(format!(
                "elemental reference `{}` has energy {}; using 0",
                entries[pos].id, entries[pos].energy
            )),
            Some(_) => {}
        }
    }
    let mut rows: Vec<(usize, Vec<f64>)> = kept.into_values().collect();
    rows.sort_by_key(|(pos, _)| *pos);
    let variables = vec![
        AxisDescriptor::extensive(format!("x_{}", sys[0])),
        AxisDescriptor::extensive(format!("x_{}", sys[1])),
    ];
    let points = rows
        .iter()
        .map(|(pos, f)| {
            let e = &entries[*pos];
            let energy = if f.iter().any(|&v| v == 1.0) {
                0.0
            } else {
                e.energy
            };
            crate::hull::LabeledPoint {
                index: *pos,
                phase: e.id.clone(),
                x: vec![f[0], f[1]],
                energy,
            }
        })
        .collect();
    Ok(ChemicalSystem {
        elements: sys.to_vec(),
        cloud: PointCloud::new(variables, points)?,
        entry_ids: rows
            .iter()
            .map(|(pos, _)| entries[*pos].id.clone())
            .collect(),
        warnings,
    })
}
